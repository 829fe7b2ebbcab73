// cfgs: compile specs, enumerate worlds and explain decisions from the shell.
//
// Exit codes: 0 ok, 1 internal error, 2 unreadable or invalid input,
// 3 stratification or range-restriction error, 4 instance already desired,
// 5 no counterfactual satisfies the restrictions.

#include "cfgs/asp/completion.hpp"
#include "cfgs/engine.hpp"
#include "cfgs/errors.hpp"
#include "cfgs/service/api.hpp"
#include "cfgs/service/document.hpp"
#include "cfgs/service/server.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <iostream>

using namespace cfgs;
using namespace cfgs::service;

namespace {

int exit_code(const std::exception& e) {
    if (dynamic_cast<const StratificationError*>(&e) || dynamic_cast<const RangeRestrictionError*>(&e)) return 3;
    if (dynamic_cast<const NotUndesired*>(&e)) return 4;
    if (dynamic_cast<const InfeasibleRestrictions*>(&e)) return 5;
    if (dynamic_cast<const SpecValidationError*>(&e) || dynamic_cast<const SyntaxError*>(&e) ||
        dynamic_cast<const RequestError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
        dynamic_cast<const IllegalCode*>(&e) || dynamic_cast<const UnrealisticInstance*>(&e) ||
        dynamic_cast<const FixtureCorrupt*>(&e))
        return 2;
    return 1;
}

std::vector<std::pair<std::string, std::string>> pairs(const std::vector<std::string>& items, const std::string& flag) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw RequestError(flag, "expected name=value, got '" + item + "'");
        out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return out;
}

SpecDocument load(const std::string& path) {
    if (!std::filesystem::exists(path)) throw RequestError("spec", "no such file: " + path);
    try {
        return load_spec_file(path);
    } catch (const SpecValidationError& e) {
        throw SpecValidationError(e.field(), std::string(e.what()).substr(e.field().size() + 2) + " (in " + path + ")");
    }
}

std::atomic<HttpServer*> running{nullptr};

void on_signal(int) {
    if (auto* s = running.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Counterfactual explanations for rule-based classifiers"};
    app.require_subcommand(1);

    std::string spec_path, format = "table", world = "pre";
    std::vector<std::string> instance, restrict;
    std::optional<int> cost_bound;
    std::optional<std::size_t> limit;
    bool minimal_only = false, duals = false;

    auto* compile = app.add_subcommand("compile", "Print the compiled logic program");
    compile->add_option("spec", spec_path, "Spec file")->required();
    compile->add_flag("--duals", duals, "Also print the dual (completed) rules");

    auto* classify = app.add_subcommand("classify", "Classify one instance");
    classify->add_option("spec", spec_path, "Spec file")->required();
    classify->add_option("-i,--instance", instance, "feature=value")->required()->delimiter(',');

    auto* enumerate = app.add_subcommand("enumerate", "List undesired (pre) or counterfactual (post) instances");
    enumerate->add_option("spec", spec_path, "Spec file")->required();
    enumerate->add_option("-w,--world", world, "pre or post")->check(CLI::IsMember({"pre", "post"}));
    enumerate->add_option("-n,--limit", limit, "Stop after n answers");
    enumerate->add_option("-f,--format", format, "table or json")->check(CLI::IsMember({"table", "json"}));

    auto* explain = app.add_subcommand("explain", "Counterfactual pairs for an undesired instance");
    explain->add_option("spec", spec_path, "Spec file")->required();
    explain->add_option("-i,--instance", instance, "feature=value")->required()->delimiter(',');
    explain->add_option("-r,--restrict", restrict, "feature=code with code 0, 1, -1 or free")->delimiter(',');
    explain->add_option("-c,--cost-bound", cost_bound, "Maximum cost");
    explain->add_option("-n,--limit", limit, "Stop after n pairs");
    explain->add_flag("-m,--minimal-only", minimal_only, "Only pairs of the lowest feasible cost");
    explain->add_option("-f,--format", format, "table or json")->check(CLI::IsMember({"table", "json"}));

    std::string host = "127.0.0.1", spec_dir;
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    serve->add_option("-p,--port", port, "Port, 0 for any free port");
    serve->add_option("--host", host, "Bind address");
    serve->add_option("-d,--spec-dir", spec_dir, "Directory of .spec files (default: bundled fixtures)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*compile) {
            const auto doc = load(spec_path);
            Engine engine(doc.spec);
            std::cout << engine.program_text();
            if (duals) std::cout << "\n% dual rules\n" << asp::serialize_duals(engine.dual());
            return 0;
        }
        if (*classify) {
            const auto doc = load(spec_path);
            const auto req = make_explain_request(doc.spec, pairs(instance, "instance"), {});
            const auto out = Engine(doc.spec).classify(req.instance);
            std::cout << (out == Outcome::Undesired ? "undesired" : "desired") << " (" << doc.spec.decision.target
                      << (out == Outcome::Undesired ? " holds" : " does not hold") << ")\n";
            return 0;
        }
        if (*enumerate) {
            const auto doc = load(spec_path);
            Engine engine(doc.spec);
            const auto w = parse_world(world);
            const auto list = w == World::Pre ? engine.enumerate_undesired(limit) : engine.enumerate_counterfactuals(limit);
            if (format == "json")
                std::cout << enumerate_json(doc.id, doc.spec, w, list).dump(2) << "\n";
            else
                std::cout << enumerate_table(doc.spec, w, list);
            return 0;
        }
        if (*explain) {
            const auto doc = load(spec_path);
            auto req = make_explain_request(doc.spec, pairs(instance, "instance"), pairs(restrict, "restrict"));
            req.options.cost_bound = cost_bound;
            req.options.limit = limit;
            req.options.minimal_only = minimal_only;
            Engine engine(doc.spec);
            const auto result = engine.explain(req.instance, req.restrictions, req.options);
            if (format == "json")
                std::cout << explain_json(doc.id, doc.spec, req.instance, result).dump(2) << "\n";
            else
                std::cout << explain_table(doc.spec, req.instance, result);
            if (result.pairs.empty()) throw InfeasibleRestrictions(*result.infeasible, result.all_immutable);
            return 0;
        }
        if (*serve) {
            auto docs = spec_dir.empty() ? load_fixtures() : load_spec_dir(spec_dir);
            Service service(std::move(docs));
            HttpServer server(service);
            const int bound = server.bind(host, port);
            std::cerr << "serving " << service.ids().size() << " specs on http://" << host << ":" << bound << "\n";
            running = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            server.listen();
            running = nullptr;
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "cfgs: " << error_code(e) << ": " << e.what() << "\n";
        return exit_code(e);
    }
    return 0;
}
