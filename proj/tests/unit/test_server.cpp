#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "arena/server/server.hpp"
#include "arena/server/session.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace arena;
using nlohmann::json;

namespace {

const PolicyModel& test_model() {
  static const PolicyModel model = [] {
    ModelConfig c;
    c.embed_dim = 8;
    c.trunk = {16, 16};
    c.heads = 2;
    return PolicyModel(c, EncoderLimits{}, 5);
  }();
  return model;
}

GameConfig short_game(int max_steps) {
  GameConfig g;
  g.max_steps = max_steps;
  return g;
}

std::string hello() { return json{{"type", "hello"}, {"version", kProtocolVersion}}.dump(); }

std::string input(int tick, int move, bool shoot) {
  return json{{"type", "input"}, {"tick", tick}, {"move", move}, {"shoot", shoot}}.dump();
}

json parse(const Frame& f) { return json::parse(f.text); }

Session started(GameConfig game, SessionOptions options = {}) {
  Session s(test_model(), std::move(game), options);
  s.on_message(hello());
  return s;
}

// Scripted exchange covering handshake, applied, stale and expired inputs,
// the end of a match, a rematch and a protocol error.
std::string scripted_transcript() {
  SessionOptions opts;
  opts.seed = 42;
  Session s(test_model(), short_game(20), opts);
  std::ostringstream out;
  auto client = [&](const std::string& msg) {
    out << "C " << msg << '\n';
    for (const Frame& f : s.on_message(msg)) out << "S " << f.text << '\n';
  };
  auto ticks = [&](int n) {
    for (int i = 0; i < n; ++i) {
      for (const Frame& f : s.tick()) out << "S " << f.text << '\n';
    }
  };
  client(hello());
  ticks(3);
  client(input(3, 3, false));
  ticks(2);
  client(input(0, 5, true));
  client(input(5, 1, true));
  ticks(25);
  client(json{{"type", "rematch"}}.dump());
  ticks(2);
  client(json{{"type", "bogus"}}.dump());
  ticks(1);
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_SUITE("server") {

TEST_CASE("hello yields hello, config and the first snapshot") {
  Session s(test_model(), short_game(50), {});
  CHECK(s.tick().empty());
  const auto frames = s.on_message(hello());
  REQUIRE(frames.size() == 3);
  CHECK(parse(frames[0])["type"] == "hello");
  CHECK(parse(frames[0])["fingerprint"] == fingerprint(short_game(50)));
  const json config = parse(frames[1]);
  CHECK(config["type"] == "config");
  CHECK(config["tick_hz"] == 30);
  CHECK(config["player_id"] == kPlayerId);
  CHECK(config["enemy_ids"].size() == 1);
  CHECK(frames[2].snapshot);
  CHECK(parse(frames[2])["tick"] == 0);
  CHECK(s.phase() == Session::Phase::Playing);
}

TEST_CASE("handshake errors close the session with an error frame") {
  auto expect_error = [](const std::string& first, const std::string& needle) {
    Session s(test_model(), short_game(50), {});
    const auto frames = s.on_message(first);
    REQUIRE(frames.size() == 1);
    const json err = parse(frames[0]);
    CHECK(err["type"] == "error");
    CHECK(err["message"].get<std::string>().find(needle) != std::string::npos);
    CHECK(s.closed());
    CHECK(s.on_message(hello()).empty());
    CHECK(s.tick().empty());
  };
  expect_error("{not json", "not valid JSON");
  expect_error(R"({"version":1})", "type");
  expect_error(input(0, 0, false), "expected hello");
  expect_error(R"({"type":"hello","version":2})", "version mismatch");
  expect_error(R"({"type":"hello","version":"1"})", "version");
  expect_error(R"({"type":"hello","version":1,"fingerprint":"0000000000000000"})",
               "checkpoint mismatch");
}

TEST_CASE("a matching fingerprint is accepted") {
  Session s(test_model(), short_game(50), {});
  const json h = {{"type", "hello"}, {"version", 1}, {"fingerprint", fingerprint(short_game(50))}};
  CHECK(s.on_message(h.dump()).size() == 3);
  CHECK_FALSE(s.closed());
}

TEST_CASE("malformed inputs close the session") {
  for (const std::string& bad :
       {std::string(R"({"type":"input","tick":0,"move":9,"shoot":false})"),
        std::string(R"({"type":"input","tick":0,"move":-1,"shoot":false})"),
        std::string(R"({"type":"input","tick":0,"move":1,"shoot":1})"),
        std::string(R"({"type":"input","tick":0.5,"move":1,"shoot":true})"),
        std::string(R"({"type":"input","move":1,"shoot":true})"),
        std::string(R"({"type":"rematch"})"), std::string(R"({"type":"chat"})")}) {
    Session s = started(short_game(50));
    const auto frames = s.on_message(bad);
    REQUIRE(frames.size() == 1);
    CHECK(parse(frames[0])["type"] == "error");
    CHECK(s.closed());
  }
}

TEST_CASE("without inputs the player stands still and every tick snapshots") {
  Session s = started(short_game(50));
  const Vec2 start = s.state().player()->position;
  for (int t = 1; t <= 10; ++t) {
    const auto frames = s.tick();
    REQUIRE(!frames.empty());
    CHECK(frames[0].snapshot);
    CHECK(parse(frames[0])["tick"] == t);
    if (!s.state().player()) break;
    CHECK(s.state().player()->position == start);
  }
}

TEST_CASE("latest input wins and stale inputs are discarded") {
  Session s = started(short_game(50));
  for (int i = 0; i < 5; ++i) s.tick();
  REQUIRE(s.state().tick == 5);
  const Vec2 p0 = s.state().player()->position;

  // Tick 2 is three behind the server: dropped. Tick 3 is exactly in range.
  s.on_message(input(2, 3, false));
  CHECK(s.inputs_discarded() == 1);
  s.on_message(input(3, 7, false));
  s.on_message(input(5, 3, false));  // supersedes the westward input
  s.on_message(input(9, 5, false));  // from the future: dropped
  CHECK(s.inputs_discarded() == 2);
  s.tick();
  const Vec2 p1 = s.state().player()->position;
  CHECK(p1.x > p0.x);
  CHECK(p1.y == p0.y);
}

TEST_CASE("an input expires after it ages past the window") {
  Session s = started(short_game(50));
  s.on_message(input(0, 3, false));
  std::vector<double> xs = {s.state().player()->position.x};
  for (int i = 0; i < 5; ++i) {
    s.tick();
    xs.push_back(s.state().player()->position.x);
  }
  // Applied at server ticks 0, 1 and 2, then the player stays put.
  CHECK(xs[1] > xs[0]);
  CHECK(xs[3] > xs[2]);
  CHECK(xs[4] == xs[3]);
  CHECK(xs[5] == xs[4]);
}

TEST_CASE("a never-moving human ends in an agent win or a timeout within 1000 ticks") {
  Session s = started(GameConfig{});
  std::vector<Frame> last;
  int ticks = 0;
  while (s.phase() == Session::Phase::Playing && ticks < 1000) {
    last = s.tick();
    ++ticks;
  }
  CHECK(s.phase() == Session::Phase::Ended);
  REQUIRE(last.size() == 2);
  const json end = parse(last[1]);
  CHECK(end["type"] == "end");
  CHECK((end["winner"] == "agent" || end["winner"] == "none"));
  CHECK(end["stats"]["human_shots"] == 0);
  CHECK(end["stats"]["ticks"] == ticks);
  CHECK(s.tick().empty());

  const auto again = s.on_message(json{{"type", "rematch"}}.dump());
  REQUIRE(again.size() == 2);
  CHECK(parse(again[0])["match"] == 1);
  CHECK(parse(again[1])["tick"] == 0);
  CHECK(s.matches_started() == 2);
}

TEST_CASE("scripted session is deterministic and matches the golden transcript") {
  const std::string transcript = scripted_transcript();
  CHECK(scripted_transcript() == transcript);
  const std::string path = std::string(ARENA_GOLDEN_DIR) + "/session_transcript.txt";
  if (std::getenv("UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << transcript;
  }
  const std::string golden = read_file(path);
  REQUIRE_FALSE(golden.empty());
  CHECK(golden == transcript);
}

TEST_CASE("websocket client completes a full session") {
  namespace net = boost::asio;
  namespace beast = boost::beast;
  namespace websocket = beast::websocket;

  const GameConfig game = short_game(60);
  ServerOptions opts;
  opts.port = 0;
  opts.session.tick_hz = 200;
  opts.session.seed = 9;
  PlayServer server(test_model(), game, opts);
  server.start();

  // Reference stream: the same session driven locally with no inputs.
  Session ref(test_model(), game, opts.session);
  std::vector<Frame> expected = ref.on_message(hello());
  while (ref.phase() == Session::Phase::Playing) {
    for (Frame& f : ref.tick()) expected.push_back(std::move(f));
  }
  std::map<int, std::string> snapshot_by_tick;
  for (const Frame& f : expected) {
    if (f.snapshot) snapshot_by_tick[parse(f)["tick"].get<int>()] = f.text;
  }

  net::io_context io;
  net::ip::tcp::resolver resolver(io);
  websocket::stream<net::ip::tcp::socket> ws(io);
  net::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(server.port())));
  ws.handshake("127.0.0.1", "/");
  ws.write(net::buffer(hello()));

  std::vector<std::string> received;
  beast::flat_buffer buf;
  for (;;) {
    ws.read(buf);
    received.push_back(beast::buffers_to_string(buf.data()));
    buf.consume(buf.size());
    if (json::parse(received.back())["type"] == "end") break;
  }
  REQUIRE(received.size() >= 4);
  CHECK(received[0] == expected[0].text);
  CHECK(received[1] == expected[1].text);
  CHECK(received.back() == expected.back().text);
  int prev_tick = -1;
  for (std::size_t i = 2; i + 1 < received.size(); ++i) {
    const json snap = json::parse(received[i]);
    REQUIRE(snap["type"] == "snapshot");
    const int tick = snap["tick"].get<int>();
    CHECK(tick > prev_tick);
    CHECK(received[i] == snapshot_by_tick.at(tick));
    prev_tick = tick;
  }
  CHECK(prev_tick == ref.state().tick);

  ws.write(net::buffer(json{{"type", "rematch"}}.dump()));
  ws.read(buf);
  CHECK(json::parse(beast::buffers_to_string(buf.data()))["match"] == 1);
  buf.consume(buf.size());
  ws.write(net::buffer(std::string("{oops")));
  for (;;) {
    ws.read(buf);
    const json msg = json::parse(beast::buffers_to_string(buf.data()));
    buf.consume(buf.size());
    if (msg["type"] == "error") break;
  }
  beast::error_code ec;
  ws.read(buf, ec);
  CHECK(ec == websocket::error::closed);
  server.stop();
}

}  // TEST_SUITE
