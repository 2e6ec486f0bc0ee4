#pragma once

#include "trafficsim/engine.h"

#include <nlohmann/json.hpp>

#include <memory>
#include <string>

namespace trafficsim {

    // {"type":"frame","step":n,"time":t,"vehicles":[{id,x,y,heading,speed}],"signals":{laneLinkId:"g"}}
    nlohmann::json frameJson(const Engine &engine);

    // Applies viewer commands to an engine between steps. Every command yields an ack
    // {"type":"ack","requestId":...,"ok":bool[,"error":text]}; a failed command leaves the engine
    // untouched.
    class CommandProcessor {
    public:
        explicit CommandProcessor(Engine &engine) : engine(engine) {}

        nlohmann::json apply(const nlohmann::json &message);
        nlohmann::json applyText(const std::string &text);

        bool paused() const { return isPaused; }

    private:
        Engine &engine;
        bool isPaused = false;
    };

    struct ServeOptions {
        unsigned short port = 8080; // 0 picks a free port
        double rate = 10.0;         // steps per second
        bool maxSpeed = false;
        std::uint64_t maxSteps = 0; // 0: run until stopped
    };

    // WebSocket server: one stepping loop, frames broadcast to every connection, commands
    // applied between steps.
    class ServeServer {
    public:
        ServeServer(Engine &engine, ServeOptions options);
        ~ServeServer();

        ServeServer(const ServeServer &) = delete;
        ServeServer &operator=(const ServeServer &) = delete;

        unsigned short port() const;
        void start();
        void stop();
        // Blocks until the stepping loop ends (maxSteps reached or stop()).
        void wait();

    private:
        struct Impl;
        std::unique_ptr<Impl> impl;
    };

}
