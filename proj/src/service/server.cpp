#include "cfgs/service/server.hpp"

#include "cfgs/errors.hpp"
#include "cfgs/service/api.hpp"

#include <httplib.h>

#include <chrono>

namespace cfgs::service {

namespace {

HttpResponse ok_json(const json& body) { return {200, body.dump(2) + "\n", "application/json"}; }

HttpResponse error_response(const std::exception& e) {
    return {http_status(e), error_json(e).dump(2) + "\n", "application/json"};
}

HttpResponse not_found(const std::string& what) {
    json err{{"error", {{"code", "NotFound"}, {"message", what}}}};
    return {404, err.dump(2) + "\n", "application/json"};
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= path.size()) {
        auto end = path.find('/', start);
        if (end == std::string::npos) end = path.size();
        if (end > start) parts.push_back(path.substr(start, end - start));
        start = end + 1;
    }
    return parts;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Service::Service(std::vector<SpecDocument> docs, EngineOptions options) : options_(options) { reload(std::move(docs)); }

void Service::reload(std::vector<SpecDocument> docs) {
    auto next = std::make_shared<Registry>();
    for (auto& d : docs) {
        auto engine = std::make_shared<const Engine>(d.spec, options_);
        const auto id = d.id;
        if (!next->emplace(id, Entry{std::move(d), std::move(engine)}).second)
            throw Error("duplicate spec id '" + id + "'");
    }
    std::lock_guard lock(mu_);
    registry_ = std::move(next);
}

std::shared_ptr<const Service::Registry> Service::snapshot() const {
    std::lock_guard lock(mu_);
    return registry_;
}

std::vector<std::string> Service::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, e] : *snapshot()) out.push_back(id);
    return out;
}

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::multimap<std::string, std::string>& params, const std::string& body) const {
    const auto reg = snapshot();
    const auto parts = split_path(path);
    try {
        if (method == "GET" && parts.size() == 1 && parts[0] == "health") return {200, "ok", "text/plain"};
        if (parts.empty() || parts[0] != "specs") return not_found("no route for " + method + " " + path);
        if (parts.size() == 1) {
            if (method != "GET") return not_found("no route for " + method + " " + path);
            json list = json::array();
            for (const auto& [id, e] : *reg) {
                const auto& s = e.doc.spec;
                list.push_back({{"id", id},
                                {"dataset", s.metadata.dataset},
                                {"variant", s.metadata.variant},
                                {"undesired_label", s.metadata.undesired_label},
                                {"target", s.decision.target},
                                {"features", s.features.size()}});
            }
            return ok_json(list);
        }
        auto it = reg->find(parts[1]);
        if (it == reg->end()) return not_found("unknown spec '" + parts[1] + "'");
        const auto& entry = it->second;
        const auto& spec = entry.doc.spec;
        if (parts.size() == 2 && method == "GET") return ok_json(spec_to_json(spec));
        if (parts.size() != 3) return not_found("no route for " + method + " " + path);
        if (parts[2] == "program" && method == "GET") return {200, entry.engine->program_text(), "text/plain"};
        if (parts[2] == "explain" && method == "POST") {
            const auto req = parse_explain_request(spec, json::parse(body.empty() ? "{}" : body));
            const auto t0 = std::chrono::steady_clock::now();
            const auto result = entry.engine->explain(req.instance, req.restrictions, req.options);
            const double ms = elapsed_ms(t0);
            if (result.pairs.empty()) throw InfeasibleRestrictions(*result.infeasible, result.all_immutable);
            return ok_json(explain_json(entry.doc.id, spec, req.instance, result, ms));
        }
        if (parts[2] == "enumerate" && method == "POST") {
            auto w = params.find("world");
            const World world = parse_world(w == params.end() ? "pre" : w->second);
            std::optional<std::size_t> limit;
            if (auto l = params.find("limit"); l != params.end()) {
                try {
                    limit = std::stoul(l->second);
                } catch (const std::exception&) {
                    throw RequestError("limit", "expected a positive integer");
                }
            }
            const auto t0 = std::chrono::steady_clock::now();
            const auto instances = world == World::Pre ? entry.engine->enumerate_undesired(limit)
                                                       : entry.engine->enumerate_counterfactuals(limit);
            return ok_json(enumerate_json(entry.doc.id, spec, world, instances, elapsed_ms(t0)));
        }
        return not_found("no route for " + method + " " + path);
    } catch (const std::exception& e) {
        return error_response(e);
    }
}

struct HttpServer::Impl {
    const Service& service;
    httplib::Server server;
    explicit Impl(const Service& s) : service(s) {}
};

HttpServer::HttpServer(const Service& service) : impl_(std::make_unique<Impl>(service)) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
        std::multimap<std::string, std::string> params(req.params.begin(), req.params.end());
        const auto out = impl_->service.handle(req.method, req.path, params, req.body);
        res.status = out.status;
        res.set_header("X-Schema-Version", kSchemaVersion);
        res.set_content(out.body, out.content_type.c_str());
    };
    impl_->server.Get(R"(/.*)", route);
    impl_->server.Post(R"(/.*)", route);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int p = impl_->server.bind_to_any_port(host.c_str());
        if (p < 0) throw Error("cannot bind " + host);
        return p;
    }
    if (!impl_->server.bind_to_port(host.c_str(), port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace cfgs::service
