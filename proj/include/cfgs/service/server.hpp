#pragma once

// HTTP front end. Routing lives in Service::handle so it can be exercised
// without sockets; HttpServer binds it to a port.
//
//   GET  /health                      "ok"
//   GET  /specs                       [{id, dataset, variant, ...}]
//   GET  /specs/{id}                  spec document (JSON form)
//   GET  /specs/{id}/program          compiled program text
//   POST /specs/{id}/explain          explain request -> pairs
//   POST /specs/{id}/enumerate?world=pre|post[&limit=n]
//
// Every response carries X-Schema-Version: cfgs-spec/1.

#include "cfgs/engine.hpp"
#include "cfgs/service/document.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace cfgs::service {

struct HttpResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

class Service {
public:
    explicit Service(std::vector<SpecDocument> docs, EngineOptions options = {});

    // Compiles every document, then swaps the registry in one step; requests
    // in flight keep the registry they started with. Throws and leaves the
    // current registry in place when any document fails to compile.
    void reload(std::vector<SpecDocument> docs);

    std::vector<std::string> ids() const;

    HttpResponse handle(const std::string& method, const std::string& path,
                        const std::multimap<std::string, std::string>& params, const std::string& body) const;

private:
    struct Entry {
        SpecDocument doc;
        std::shared_ptr<const Engine> engine;
    };
    using Registry = std::map<std::string, Entry>;

    std::shared_ptr<const Registry> snapshot() const;

    EngineOptions options_;
    mutable std::mutex mu_;
    std::shared_ptr<const Registry> registry_;
};

class HttpServer {
public:
    explicit HttpServer(const Service& service);
    ~HttpServer();

    // Port 0 picks a free port. Returns the bound port; throws on failure.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace cfgs::service
