#include "gridloop/cosim/remote.hpp"

namespace gridloop::cosim {

Json SimulatorMeta::to_json() const {
    Json models_json = Json::object();
    for (const auto& [name, m] : models)
        models_json[name] = Json{{"inputs", m.inputs}, {"outputs", m.outputs}};
    return Json{{"models", models_json}};
}

SimulatorMeta SimulatorMeta::from_json(const Json& j) {
    SimulatorMeta meta;
    if (!j.is_object() || !j.contains("models") || !j["models"].is_object())
        throw ProtocolError("simulator meta missing models object");
    for (const auto& [name, m] : j["models"].items()) {
        ModelMeta mm;
        mm.inputs = m.value("inputs", std::vector<std::string>{});
        mm.outputs = m.value("outputs", std::vector<std::string>{});
        meta.models[name] = std::move(mm);
    }
    return meta;
}

RemoteSimulator::RemoteSimulator(io::TcpStream stream, int request_timeout_ms)
    : stream_(std::move(stream)), timeout_ms_(request_timeout_ms) {}

Json RemoteSimulator::call(const std::string& method, Json args, Json kwargs) {
    const uint64_t id = next_id_++;
    auto frame = encode_message(WireMessage::request(id, method, std::move(args), std::move(kwargs)));
    auto deadline = io::deadline_in(timeout_ms_);
    stream_.write_all(frame, deadline);

    uint8_t buf[64 * 1024];
    while (true) {
        auto got = stream_.read(buf);
        if (!got) {
            if (!io::wait_readable(stream_.fd(), deadline))
                throw RemoteError("timeout waiting for reply to \"" + method + "\"");
            continue;
        }
        if (*got == 0) throw RemoteError("simulator closed connection during \"" + method + "\"");
        for (auto& msg : decoder_.feed({buf, *got})) {
            if (msg.request_id != id)
                throw ProtocolError("reply id " + std::to_string(msg.request_id) +
                                    " does not match request " + std::to_string(id));
            if (msg.kind == WireKind::Error)
                throw RemoteError("simulator error on \"" + method +
                                  "\": " + msg.payload.get<std::string>());
            if (msg.kind != WireKind::Success)
                throw ProtocolError("unexpected request from simulator while awaiting reply");
            return msg.payload;
        }
    }
}

SimulatorMeta RemoteSimulator::init(const std::string& assigned_name, const Json& params) {
    return SimulatorMeta::from_json(call("init", Json::array({assigned_name}), params));
}

std::vector<EntityDescr> RemoteSimulator::create(int num, const std::string& model,
                                                 const Json& params) {
    Json reply = call("create", Json::array({num, model}), params);
    if (!reply.is_array()) throw ProtocolError("create reply is not an array");
    std::vector<EntityDescr> out;
    for (const auto& e : reply)
        out.push_back(EntityDescr{e.at("eid").get<std::string>(), e.at("type").get<std::string>()});
    return out;
}

void RemoteSimulator::setup_done() { call("setup_done", Json::array()); }

void RemoteSimulator::step(SimTime time, const Json& inputs) {
    call("step", Json::array({time, inputs}));
}

Json RemoteSimulator::get_data(const Json& request) {
    return call("get_data", Json::array({request}));
}

void RemoteSimulator::stop() {
    try {
        call("stop", Json::array());
    } catch (const std::exception&) {
        // Peer may exit before the reply is flushed; stop is best-effort.
    }
}

SimulatorServer::SimulatorServer(io::TcpStream stream, Simulator& sim)
    : stream_(std::move(stream)), sim_(sim) {}

bool SimulatorServer::pump() {
    if (done_) return false;
    uint8_t buf[64 * 1024];
    while (true) {
        auto got = stream_.read(buf);
        if (!got) return true;  // would block
        if (*got == 0) {
            done_ = true;
            return false;
        }
        for (auto& msg : decoder_.feed({buf, *got})) {
            if (msg.kind != WireKind::Request) throw ProtocolError("expected a request");
            serve(msg);
            if (done_) return false;
        }
    }
}

void SimulatorServer::serve(const WireMessage& req) {
    const std::string method = req.payload[0].get<std::string>();
    const Json& args = req.payload[1];
    const Json& kwargs = req.payload[2];
    WireMessage reply;
    try {
        Json result;
        if (method == "init") {
            result = sim_.init(args.at(0).get<std::string>(), kwargs).to_json();
        } else if (method == "create") {
            Json out = Json::array();
            for (const auto& e :
                 sim_.create(args.at(0).get<int>(), args.at(1).get<std::string>(), kwargs))
                out.push_back(Json{{"eid", e.path}, {"type", e.model}});
            result = out;
        } else if (method == "setup_done") {
            sim_.setup_done();
        } else if (method == "step") {
            sim_.step(args.at(0).get<SimTime>(), args.at(1));
        } else if (method == "get_data") {
            result = sim_.get_data(args.at(0));
        } else if (method == "stop") {
            sim_.stop();
            done_ = true;
        } else {
            throw ProtocolError("unknown method: " + method);
        }
        reply = WireMessage::success(req.request_id, std::move(result));
    } catch (const std::exception& e) {
        reply = WireMessage::error(req.request_id, e.what());
    }
    stream_.write_all(encode_message(reply), io::deadline_in(30000));
}

}  // namespace gridloop::cosim
