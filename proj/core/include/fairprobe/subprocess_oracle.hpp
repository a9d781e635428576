#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "fairprobe/oracle.hpp"
#include "fairprobe/schema.hpp"
#include "fairprobe/text.hpp"

namespace fairprobe {

struct SubprocessOptions {
  std::vector<std::string> argv;
  /// Maximum time without any progress on the pipes before a batch fails.
  std::chrono::milliseconds timeout{30000};
};

/// Owns one child process speaking the line protocol:
///
///   request  (stdin):  {"id": <n>, <body>}\n
///   response (stdout): {"id": <n>, "label": "<label>"}\n
///
/// Responses are matched by id and may arrive in any order. Writes and reads
/// are multiplexed with poll() so large batches cannot deadlock on full pipe
/// buffers. Calls are serialized internally; the object is safe to share.
/// SIGPIPE is ignored process-wide once the first client starts.
class SubprocessClient {
public:
  /// Spawns the child; throws OracleError when it cannot be started.
  explicit SubprocessClient(SubprocessOptions options);
  ~SubprocessClient();

  SubprocessClient(const SubprocessClient&) = delete;
  SubprocessClient& operator=(const SubprocessClient&) = delete;

  /// Sends one request per body (`body` is the JSON members after the id,
  /// e.g. `"features":[1,2]`) and returns the labels in request order.
  /// Throws OracleError on child exit, malformed or unexpected responses, or
  /// timeout.
  std::vector<Label> exchange(std::span<const std::string> bodies);

  int pid() const noexcept { return pid_; }
  bool running() const;

private:
  void shutdown() noexcept;

  SubprocessOptions options_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::uint64_t next_id_ = 0;
  std::string pending_input_;
  bool broken_ = false;
  mutable std::mutex mutex_;
};

/// Structured samples are sent as `"features":[...]` with categorical values
/// as strings and continuous values as numbers, in schema order.
class SubprocessStructuredOracle final : public StructuredOracle {
public:
  SubprocessStructuredOracle(std::shared_ptr<SubprocessClient> client, FeatureSchema schema);
  std::vector<Label> predict_batch(std::span<const FeatureVector> samples) override;

private:
  std::shared_ptr<SubprocessClient> client_;
  FeatureSchema schema_;
};

/// Documents are sent as `"tokens":[...]`.
class SubprocessTextOracle final : public TextOracle {
public:
  explicit SubprocessTextOracle(std::shared_ptr<SubprocessClient> client);
  std::vector<Label> predict_batch(std::span<const TokenSequence> samples) override;

private:
  std::shared_ptr<SubprocessClient> client_;
};

} // namespace fairprobe
