// Line-protocol test oracle. Reads {"id":n,"features":[...]} or
// {"id":n,"tokens":[...]} per line and answers {"id":n,"label":"..."}.
// Misbehaviour switches exist for exercising the client's error paths.

#include <poll.h>
#include <unistd.h>

#include <algorithm>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

using nlohmann::json;

namespace {

struct Options {
  std::string mode = "constant";
  std::string label = "1";
  std::string other = "0";
  std::size_t feature = 0;
  double threshold = 0.0;
  std::string value;
  std::string term;
  bool reverse = false;
  long die_after = -1;
  bool garbage = false;
  bool hang = false;
  bool wrong_id = false;
};

std::string decide(const Options& o, const json& request) {
  if (o.mode == "constant") {
    return o.label;
  }
  if (o.mode == "threshold") {
    const auto& x = request.at("features").at(o.feature);
    return x.get<double>() >= o.threshold ? o.label : o.other;
  }
  if (o.mode == "equals") {
    const auto& x = request.at("features").at(o.feature);
    const auto s = x.is_string() ? x.get<std::string>() : x.dump();
    return s == o.value ? o.label : o.other;
  }
  // term
  const auto tokens = request.at("tokens").get<std::vector<std::string>>();
  return std::find(tokens.begin(), tokens.end(), o.term) != tokens.end() ? o.label : o.other;
}

bool input_ready() {
  pollfd p{STDIN_FILENO, POLLIN, 0};
  return ::poll(&p, 1, 0) > 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stub prediction oracle speaking the JSON-lines protocol"};
  Options o;
  app.add_option("--mode", o.mode, "constant, threshold, equals or term")
      ->check(CLI::IsMember({"constant", "threshold", "equals", "term"}));
  app.add_option("--label", o.label, "label for constant mode and for matches");
  app.add_option("--other", o.other, "label for non-matches");
  app.add_option("--feature", o.feature, "feature position for threshold/equals");
  app.add_option("--threshold", o.threshold, "features[feature] >= threshold matches");
  app.add_option("--value", o.value, "features[feature] == value matches");
  app.add_option("--term", o.term, "token whose presence matches");
  app.add_flag("--reverse", o.reverse, "answer each burst of requests in reverse order");
  app.add_option("--die-after", o.die_after, "exit after this many requests");
  app.add_flag("--garbage", o.garbage, "answer with a line that is not JSON");
  app.add_flag("--hang", o.hang, "read requests but never answer");
  app.add_flag("--wrong-id", o.wrong_id, "answer with ids that were never sent");
  CLI11_PARSE(app, argc, argv);

  std::ios::sync_with_stdio(false);
  std::vector<std::string> pending;
  long seen = 0;
  std::string line;
  auto flush = [&] {
    if (o.reverse) {
      std::reverse(pending.begin(), pending.end());
    }
    for (const auto& p : pending) {
      std::cout << p << '\n';
    }
    pending.clear();
    std::cout.flush();
  };
  while (std::getline(std::cin, line)) {
    if (o.die_after >= 0 && seen >= o.die_after) {
      return 3;
    }
    ++seen;
    if (o.hang) {
      continue;
    }
    if (o.garbage) {
      std::cout << "not json\n" << std::flush;
      continue;
    }
    try {
      const auto request = json::parse(line);
      auto id = request.at("id").get<std::uint64_t>();
      if (o.wrong_id) {
        id += 1000000;
      }
      pending.push_back(json({{"id", id}, {"label", decide(o, request)}}).dump());
    } catch (const std::exception& e) {
      std::cerr << "stub oracle: " << e.what() << "\n";
      return 4;
    }
    if (!o.reverse || (std::cin.rdbuf()->in_avail() <= 0 && !input_ready())) {
      flush();
    }
  }
  flush();
  if (o.hang) {
    std::this_thread::sleep_for(std::chrono::hours(1));
  }
  return 0;
}
