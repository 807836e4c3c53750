#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gridloop/cosim/wire.hpp"

using namespace gridloop::cosim;

TEST_CASE("request frame has big-endian length prefix and text body") {
    auto msg = WireMessage::request(1, "step", Json::array({0}));
    auto frame = encode_message(msg);
    REQUIRE(frame.size() > 4);
    size_t body_len = frame.size() - 4;
    CHECK(frame[0] == (body_len >> 24 & 0xff));
    CHECK(frame[1] == (body_len >> 16 & 0xff));
    CHECK(frame[2] == (body_len >> 8 & 0xff));
    CHECK(frame[3] == (body_len & 0xff));
    std::string body(frame.begin() + 4, frame.end());
    CHECK(body == R"([0,1,["step",[0],{}]])");
    CHECK(decode_message(frame) == msg);
}

TEST_CASE("round-trip for all kinds") {
    std::vector<WireMessage> msgs = {
        WireMessage::request(7, "get_data", Json::array({Json{{"vif-0", {"tx"}}}})),
        WireMessage::success(7, Json{{"vif-0", {{"tx", Json::array({"AAAA"})}}}}),
        WireMessage::error(9, "no such entity"),
    };
    for (const auto& m : msgs) CHECK(decode_message(encode_message(m)) == m);
}

TEST_CASE("truncated frame is retained, not an error") {
    auto frame = encode_message(WireMessage::request(2, "init", Json::array({"sim"})));
    StreamDecoder dec;
    auto part = dec.feed({frame.data(), frame.size() - 3});
    CHECK(part.empty());
    CHECK(dec.pending_bytes() == frame.size() - 3);
    auto rest = dec.feed({frame.data() + frame.size() - 3, 3});
    REQUIRE(rest.size() == 1);
    CHECK(rest[0].request_id == 2);
    CHECK(dec.pending_bytes() == 0);
}

TEST_CASE("three pipelined frames decode in order") {
    std::vector<uint8_t> buffer;
    for (uint64_t id = 1; id <= 3; ++id) {
        auto f = encode_message(WireMessage::request(id, "step", Json::array({id})));
        buffer.insert(buffer.end(), f.begin(), f.end());
    }
    StreamDecoder dec;
    auto msgs = dec.feed(buffer);
    REQUIRE(msgs.size() == 3);
    for (uint64_t id = 1; id <= 3; ++id) CHECK(msgs[id - 1].request_id == id);
}

TEST_CASE("oversized frame length is a protocol error") {
    std::vector<uint8_t> bytes = {0x01, 0x00, 0x00, 0x01};  // 16 MiB + 1
    StreamDecoder dec;
    CHECK_THROWS_AS(dec.feed(bytes), ProtocolError);
}

TEST_CASE("malformed payloads are protocol errors") {
    auto frame_of = [](const std::string& body) {
        std::vector<uint8_t> f = {0, 0, 0, static_cast<uint8_t>(body.size())};
        f.insert(f.end(), body.begin(), body.end());
        return f;
    };
    for (const std::string body :
         {"not json", "[0,1]", "[5,1,null]", "[0,-1,null]", "[0,1,[\"m\",{},{}]]", "[2,1,{}]"}) {
        StreamDecoder dec;
        CHECK_THROWS_AS(dec.feed(frame_of(body)), ProtocolError);
    }
}

// Wire round-trip invariant: arbitrary byte-split schedules yield the same
// message sequence a whole-buffer decode yields.
TEST_CASE("fuzz: random split schedules preserve the message sequence") {
    std::mt19937_64 rng(0xC0DEC);
    for (int round = 0; round < 200; ++round) {
        std::vector<WireMessage> expect;
        std::vector<uint8_t> stream;
        int n = 1 + int(rng() % 5);
        for (int i = 0; i < n; ++i) {
            WireMessage m;
            switch (rng() % 3) {
                case 0:
                    m = WireMessage::request(rng() % 1000, "step",
                                             Json::array({int(rng() % 100)}),
                                             Json{{"k", int(rng() % 7)}});
                    break;
                case 1: m = WireMessage::success(rng() % 1000, Json{{"v", int(rng() % 100)}}); break;
                default: m = WireMessage::error(rng() % 1000, "boom"); break;
            }
            expect.push_back(m);
            auto f = encode_message(m);
            stream.insert(stream.end(), f.begin(), f.end());
        }
        StreamDecoder dec;
        std::vector<WireMessage> got;
        size_t off = 0;
        while (off < stream.size()) {
            size_t len = 1 + rng() % 17;
            len = std::min(len, stream.size() - off);
            for (auto& m : dec.feed({stream.data() + off, len})) got.push_back(std::move(m));
            off += len;
        }
        REQUIRE(got.size() == expect.size());
        for (size_t i = 0; i < got.size(); ++i) CHECK(got[i] == expect[i]);
        CHECK(dec.pending_bytes() == 0);
    }
}
