#include <doctest.h>

#include <signal.h>

#include <algorithm>
#include <chrono>
#include <thread>

#include "fairprobe/error.hpp"
#include "fairprobe/subprocess_oracle.hpp"
#include "synthetic.hpp"

using namespace fairprobe;
using namespace std::chrono_literals;

namespace {

std::shared_ptr<SubprocessClient> stub(std::vector<std::string> args, std::chrono::milliseconds timeout = 10000ms) {
  args.insert(args.begin(), FAIRPROBE_STUB_ORACLE);
  return std::make_shared<SubprocessClient>(SubprocessOptions{std::move(args), timeout});
}

std::vector<std::string> numbered_bodies(std::size_t n) {
  std::vector<std::string> bodies;
  for (std::size_t i = 0; i < n; ++i) {
    bodies.push_back("\"features\":[" + std::to_string(i) + "]");
  }
  return bodies;
}

} // namespace

TEST_CASE("labels come back in request order") {
  auto client = stub({"--mode", "threshold", "--threshold", "500", "--label", "big", "--other", "small"});
  const auto labels = client->exchange(numbered_bodies(1000));
  REQUIRE(labels.size() == 1000);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    CHECK(labels[i] == (i >= 500 ? "big" : "small"));
  }
  CHECK(client->exchange(std::span<const std::string>{}).empty());
}

TEST_CASE("responses out of order are matched by id") {
  auto client = stub({"--mode", "threshold", "--threshold", "0.5", "--reverse"});
  Rng rng(4);
  std::vector<std::string> bodies;
  std::vector<std::string> expected;
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform01();
    bodies.push_back("\"features\":[" + format_number(v) + "]");
    expected.push_back(v >= 0.5 ? "1" : "0");
  }
  for (int round = 0; round < 3; ++round) {
    CHECK(client->exchange(bodies) == expected);
  }
  CHECK(client->running());
}

TEST_CASE("structured oracle sends category names and numbers") {
  const auto schema = fptest::mixed_schema();
  SubprocessStructuredOracle by_race(stub({"--mode", "equals", "--feature", "1", "--value", "black"}), schema);
  SubprocessStructuredOracle by_age(stub({"--mode", "threshold", "--feature", "2", "--threshold", "40"}), schema);
  const std::vector<FeatureVector> xs{{0, 1, 30, 0.1, 0.2}, {1, 0, 45, 0.5, 0.5}, {0, 1, 41, 1, 0}};
  CHECK(by_race.predict_batch(xs) == std::vector<Label>{"1", "0", "1"});
  CHECK(by_age.predict_batch(xs) == std::vector<Label>{"0", "1", "1"});
  CHECK_THROWS_AS(by_age.predict(FeatureVector{0, 1}), OracleError);
}

TEST_CASE("text oracle sends tokens") {
  SubprocessTextOracle oracle(stub({"--mode", "term", "--term", "muslim", "--label", "toxic", "--other", "fine"}));
  const std::vector<TokenSequence> docs{tokenize("a muslim woman"), tokenize("a table"), {}};
  CHECK(oracle.predict_batch(docs) == std::vector<Label>{"toxic", "fine", "fine"});
}

TEST_CASE("a shared client serializes concurrent callers") {
  auto client = stub({"--mode", "threshold", "--threshold", "50"});
  std::vector<std::vector<Label>> results(4);
  {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < results.size(); ++t) {
      threads.emplace_back([&, t] { results[t] = client->exchange(numbered_bodies(100)); });
    }
  }
  for (const auto& r : results) {
    REQUIRE(r.size() == 100);
    CHECK(std::count(r.begin(), r.end(), "1") == 50);
  }
}

TEST_CASE("child exit is reported and poisons the client") {
  auto client = stub({"--die-after", "10"});
  CHECK_THROWS_WITH_AS(client->exchange(numbered_bodies(50)), doctest::Contains("process exited"), OracleError);
  CHECK_THROWS_WITH_AS(client->exchange(numbered_bodies(1)), doctest::Contains("no longer usable"), OracleError);
}

TEST_CASE("malformed and unexpected responses are errors") {
  CHECK_THROWS_WITH_AS(stub({"--garbage"})->exchange(numbered_bodies(3)), doctest::Contains("malformed response"),
                       OracleError);
  CHECK_THROWS_WITH_AS(stub({"--wrong-id"})->exchange(numbered_bodies(3)), doctest::Contains("unknown or already"),
                       OracleError);
}

TEST_CASE("a silent child times out") {
  auto client = stub({"--hang"}, 300ms);
  const auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_WITH_AS(client->exchange(numbered_bodies(5)), doctest::Contains("timed out"), OracleError);
  CHECK(std::chrono::steady_clock::now() - start < 5s);
}

TEST_CASE("commands that cannot start") {
  CHECK_THROWS_WITH_AS(SubprocessClient(SubprocessOptions{{"/nonexistent/oracle"}, 1000ms}),
                       doctest::Contains("cannot start"), OracleError);
  CHECK_THROWS_AS(SubprocessClient(SubprocessOptions{{}, 1000ms}), OracleError);
}

TEST_CASE("the destructor reaps the child") {
  int pid = 0;
  {
    auto client = stub({});
    pid = client->pid();
    CHECK(client->exchange(numbered_bodies(2)) == std::vector<Label>{"1", "1"});
  }
  std::this_thread::sleep_for(10ms);
  CHECK(::kill(pid, 0) != 0);
}
