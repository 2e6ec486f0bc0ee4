#include "trafficsim/serve.h"
#include "trafficsim/error.h"
#include "trafficsim/log.h"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <chrono>
#include <deque>
#include <mutex>
#include <thread>

namespace trafficsim {

    using nlohmann::json;
    namespace asio = boost::asio;
    namespace beast = boost::beast;
    namespace websocket = beast::websocket;
    using tcp = asio::ip::tcp;

    json frameJson(const Engine &engine) {
        json vehicles = json::array();
        for (const auto &p : engine.vehiclePoses())
            vehicles.push_back({{"id", p.id}, {"x", p.x}, {"y", p.y}, {"heading", p.heading}, {"speed", p.speed}});
        json signals = json::object();
        const auto &links = engine.roadnet().laneLinks;
        for (int k = 0; k < static_cast<int>(links.size()); ++k)
            signals[links[k].id] = std::string(1, colorChar(engine.laneLinkColor(k)));
        return {{"type", "frame"},
                {"step", engine.getStepCount()},
                {"time", engine.getCurrentTime()},
                {"vehicles", std::move(vehicles)},
                {"signals", std::move(signals)}};
    }

    namespace {
        json ack(const json &requestId, bool ok, const std::string &error = {}) {
            json a = {{"type", "ack"}, {"requestId", requestId}, {"ok", ok}};
            if (!ok)
                a["error"] = error;
            return a;
        }

        const json &arg(const json &args, const char *key) {
            auto it = args.find(key);
            if (it == args.end())
                throw ParameterError(std::string("missing argument '") + key + "'");
            return *it;
        }

        std::string optionalIntersection(const json &args) {
            auto it = args.find("intersection");
            return it == args.end() || it->is_null() ? std::string() : it->get<std::string>();
        }
    }

    json CommandProcessor::apply(const json &message) {
        json requestId = message.is_object() && message.contains("requestId") ? message["requestId"] : json();
        try {
            if (!message.is_object() || message.value("type", "") != "command")
                throw ParameterError("expected a message of type 'command'");
            if (!message.contains("name") || !message["name"].is_string())
                throw ParameterError("command without a name");
            const std::string name = message["name"];
            const json args = message.contains("args") && message["args"].is_object() ? message["args"] : json::object();
            if (name == "setPhase") {
                engine.setTlPhase(arg(args, "intersection").get<std::string>(), arg(args, "phase").get<int>(),
                                  args.value("immediate", false));
            } else if (name == "setCycleLength") {
                engine.setCycleLength(optionalIntersection(args), arg(args, "seconds").get<double>());
            } else if (name == "setGreenRatio") {
                engine.setGreenRatio(optionalIntersection(args), arg(args, "splits").get<std::vector<double>>());
            } else if (name == "scaleVolume") {
                engine.setVolumeScale(arg(args, "factor").get<double>());
            } else if (name == "pause") {
                isPaused = true;
            } else if (name == "resume") {
                isPaused = false;
            } else if (name == "reset") {
                engine.reset(args.value("keepRng", false));
            } else {
                throw ParameterError("unknown command '" + name + "'");
            }
            return ack(requestId, true);
        } catch (const Error &e) {
            return ack(requestId, false, e.what());
        } catch (const json::exception &e) {
            return ack(requestId, false, std::string("bad argument: ") + e.what());
        }
    }

    json CommandProcessor::applyText(const std::string &text) {
        json message;
        try {
            message = json::parse(text);
        } catch (const json::parse_error &e) {
            return ack(json(), false, std::string("malformed message: ") + e.what());
        }
        return apply(message);
    }

    namespace {
        class Session : public std::enable_shared_from_this<Session> {
        public:
            using Inbox = std::function<void(std::shared_ptr<Session>, std::string)>;

            Session(tcp::socket socket, Inbox inbox) : ws(std::move(socket)), inbox(std::move(inbox)) {}

            void start() {
                ws.async_accept([self = shared_from_this()](beast::error_code ec) {
                    if (ec)
                        return;
                    self->open = true;
                    self->read();
                    self->flush();
                });
            }

            // Must run on the io thread.
            void send(std::string message, bool droppable) {
                if (closed)
                    return;
                if (droppable && outbox.size() > 256)
                    return;
                outbox.push_back(std::move(message));
                if (open && !writing)
                    flush();
            }

            bool isClosed() const { return closed; }

            void close() {
                if (closed)
                    return;
                closed = true;
                beast::error_code ec;
                beast::get_lowest_layer(ws).socket().close(ec);
            }

        private:
            void read() {
                ws.async_read(buffer, [self = shared_from_this()](beast::error_code ec, std::size_t) {
                    if (ec) {
                        self->closed = true;
                        return;
                    }
                    std::string text = beast::buffers_to_string(self->buffer.data());
                    self->buffer.consume(self->buffer.size());
                    self->inbox(self, std::move(text));
                    self->read();
                });
            }

            void flush() {
                if (outbox.empty() || closed) {
                    writing = false;
                    return;
                }
                writing = true;
                ws.text(true);
                ws.async_write(asio::buffer(outbox.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
                    if (ec) {
                        self->closed = true;
                        return;
                    }
                    self->outbox.pop_front();
                    self->flush();
                });
            }

            websocket::stream<beast::tcp_stream> ws;
            beast::flat_buffer buffer;
            std::deque<std::string> outbox;
            Inbox inbox;
            bool open = false;
            bool writing = false;
            bool closed = false;
        };
    }

    struct ServeServer::Impl {
        Impl(Engine &engine, ServeOptions options)
            : engine(engine), processor(engine), options(options), acceptor(io) {
            tcp::endpoint endpoint(asio::ip::make_address("0.0.0.0"), options.port);
            beast::error_code ec;
            acceptor.open(endpoint.protocol(), ec);
            if (!ec)
                acceptor.set_option(asio::socket_base::reuse_address(true), ec);
            if (!ec)
                acceptor.bind(endpoint, ec);
            if (!ec)
                acceptor.listen(asio::socket_base::max_listen_connections, ec);
            if (ec)
                throw ConfigError("cannot listen on port " + std::to_string(options.port) + ": " + ec.message());
        }

        void accept() {
            acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
                if (ec)
                    return;
                auto session = std::make_shared<Session>(std::move(socket), [this](std::shared_ptr<Session> s, std::string text) {
                    std::lock_guard lock(mutex);
                    inbox.emplace_back(std::move(s), std::move(text));
                });
                sessions.push_back(session);
                session->start();
                accept();
            });
        }

        void broadcast(std::string message) {
            asio::post(io, [this, message = std::move(message)] {
                std::erase_if(sessions, [](const auto &s) { return s->isClosed(); });
                for (auto &s : sessions)
                    s->send(message, true);
            });
        }

        void stepLoop() {
            using clock = std::chrono::steady_clock;
            const auto period = std::chrono::duration_cast<clock::duration>(
                std::chrono::duration<double>(1.0 / std::max(options.rate, 1e-3)));
            auto next = clock::now();
            std::uint64_t steps = 0;
            while (!stopping) {
                std::deque<std::pair<std::weak_ptr<Session>, std::string>> pending;
                {
                    std::lock_guard lock(mutex);
                    pending.swap(inbox);
                }
                for (auto &[weak, text] : pending) {
                    std::string reply = processor.applyText(text).dump();
                    asio::post(io, [weak, reply = std::move(reply)] {
                        if (auto s = weak.lock())
                            s->send(reply, false);
                    });
                }
                if (!processor.paused()) {
                    try {
                        engine.nextStep();
                    } catch (const Error &e) {
                        log::error(std::string("serve: ") + e.what());
                        failed = true;
                        break;
                    }
                    ++steps;
                    broadcast(frameJson(engine).dump());
                    if (options.maxSteps && steps >= options.maxSteps)
                        break;
                }
                if (!options.maxSpeed || processor.paused()) {
                    next += period;
                    auto now = clock::now();
                    if (next < now)
                        next = now;
                    std::this_thread::sleep_until(next);
                }
            }
            finished = true;
        }

        Engine &engine;
        CommandProcessor processor;
        ServeOptions options;
        asio::io_context io;
        tcp::acceptor acceptor;
        std::vector<std::shared_ptr<Session>> sessions;
        std::mutex mutex;
        std::deque<std::pair<std::weak_ptr<Session>, std::string>> inbox;
        std::atomic<bool> stopping{false};
        std::atomic<bool> finished{false};
        std::atomic<bool> failed{false};
        std::thread network, stepper;
        std::optional<asio::executor_work_guard<asio::io_context::executor_type>> guard;
    };

    ServeServer::ServeServer(Engine &engine, ServeOptions options)
        : impl(std::make_unique<Impl>(engine, options)) {}

    ServeServer::~ServeServer() { stop(); }

    unsigned short ServeServer::port() const { return impl->acceptor.local_endpoint().port(); }

    void ServeServer::start() {
        impl->guard.emplace(asio::make_work_guard(impl->io));
        impl->accept();
        impl->network = std::thread([this] { impl->io.run(); });
        impl->stepper = std::thread([this] { impl->stepLoop(); });
    }

    void ServeServer::wait() {
        if (impl->stepper.joinable())
            impl->stepper.join();
    }

    void ServeServer::stop() {
        impl->stopping = true;
        if (impl->stepper.joinable())
            impl->stepper.join();
        if (impl->network.joinable()) {
            asio::post(impl->io, [this] {
                beast::error_code ec;
                impl->acceptor.close(ec);
                for (auto &s : impl->sessions)
                    s->close();
                impl->sessions.clear();
            });
            impl->guard.reset();
            impl->network.join();
        }
    }

}
