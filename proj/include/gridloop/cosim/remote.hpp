#pragma once

#include <memory>

#include "gridloop/cosim/simulator.hpp"
#include "gridloop/io/net.hpp"

namespace gridloop::cosim {

struct RemoteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Kernel-side proxy for an out-of-process simulator: each lifecycle call
/// becomes one framed request; at most one request is outstanding.
class RemoteSimulator : public Simulator {
public:
    RemoteSimulator(io::TcpStream stream, int request_timeout_ms);

    SimulatorMeta init(const std::string& assigned_name, const Json& params) override;
    std::vector<EntityDescr> create(int num, const std::string& model, const Json& params) override;
    void setup_done() override;
    void step(SimTime time, const Json& inputs) override;
    Json get_data(const Json& request) override;
    void stop() override;

private:
    Json call(const std::string& method, Json args, Json kwargs = Json::object());

    io::TcpStream stream_;
    StreamDecoder decoder_;
    uint64_t next_id_ = 1;
    int timeout_ms_;
};

/// Simulator-process side: reads requests off the kernel connection,
/// dispatches onto a local Simulator, writes replies. Drive it from a poll
/// loop; done() flips after "stop" was served.
class SimulatorServer {
public:
    SimulatorServer(io::TcpStream stream, Simulator& sim);

    // Consumes readable bytes, serves any complete requests. Returns false
    // once the peer is gone or stop was handled.
    bool pump();
    bool done() const { return done_; }
    int fd() const { return stream_.fd(); }

private:
    void serve(const WireMessage& req);

    io::TcpStream stream_;
    StreamDecoder decoder_;
    Simulator& sim_;
    bool done_ = false;
};

}  // namespace gridloop::cosim
