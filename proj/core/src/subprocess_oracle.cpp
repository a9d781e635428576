#include "fairprobe/subprocess_oracle.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <thread>
#include <unordered_map>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "fairprobe/error.hpp"

namespace fairprobe {

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

std::string describe_status(int status) {
  if (WIFEXITED(status)) {
    return "exit status " + std::to_string(WEXITSTATUS(status));
  }
  if (WIFSIGNALED(status)) {
    return "signal " + std::to_string(WTERMSIG(status));
  }
  return "unknown status";
}

std::string abbreviate(const std::string& s) {
  return s.size() > 120 ? s.substr(0, 117) + "..." : s;
}

} // namespace

SubprocessClient::SubprocessClient(SubprocessOptions options) : options_(std::move(options)) {
  if (options_.argv.empty()) {
    throw OracleError("oracle command is empty");
  }
  ignore_sigpipe();
  int in_pipe[2];
  int out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) {
    throw OracleError(std::string("pipe failed: ") + std::strerror(errno));
  }
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw OracleError(std::string("pipe failed: ") + std::strerror(errno));
  }
  // reports exec failure; closed by a successful exec via O_CLOEXEC
  int exec_pipe[2];
  if (pipe2(exec_pipe, O_CLOEXEC) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) {
      ::close(fd);
    }
    throw OracleError(std::string("pipe failed: ") + std::strerror(errno));
  }
  std::vector<char*> argv;
  for (auto& a : options_.argv) {
    argv.push_back(a.data());
  }
  argv.push_back(nullptr);

  pid_ = fork();
  if (pid_ < 0) {
    throw OracleError(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    execvp(argv[0], argv.data());
    const int err = errno;
    [[maybe_unused]] auto ignored = ::write(exec_pipe[1], &err, sizeof(err));
    _exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(exec_pipe[1]);
  int exec_errno = 0;
  ssize_t got = 0;
  do {
    got = ::read(exec_pipe[0], &exec_errno, sizeof(exec_errno));
  } while (got < 0 && errno == EINTR);
  ::close(exec_pipe[0]);
  if (got > 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
    throw OracleError("cannot start oracle '" + options_.argv.front() + "': " + std::strerror(exec_errno));
  }
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  fcntl(to_child_, F_SETFL, fcntl(to_child_, F_GETFL) | O_NONBLOCK);
  fcntl(from_child_, F_SETFL, fcntl(from_child_, F_GETFL) | O_NONBLOCK);
}

SubprocessClient::~SubprocessClient() {
  shutdown();
}

void SubprocessClient::shutdown() noexcept {
  if (to_child_ >= 0) {
    ::close(to_child_);
    to_child_ = -1;
  }
  if (from_child_ >= 0) {
    ::close(from_child_);
    from_child_ = -1;
  }
  if (pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 100; ++i) {
      if (waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

bool SubprocessClient::running() const {
  std::lock_guard lock(mutex_);
  if (pid_ <= 0 || broken_) {
    return false;
  }
  return kill(pid_, 0) == 0;
}

std::vector<Label> SubprocessClient::exchange(std::span<const std::string> bodies) {
  std::lock_guard lock(mutex_);
  if (broken_) {
    throw OracleError("oracle process is no longer usable after an earlier failure");
  }
  if (bodies.empty()) {
    return {};
  }
  const auto fail = [this](const std::string& what) {
    broken_ = true;
    return OracleError("oracle '" + options_.argv.front() + "': " + what);
  };

  std::unordered_map<std::uint64_t, std::size_t> outstanding;
  std::string out;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const auto id = next_id_++;
    outstanding.emplace(id, i);
    out += "{\"id\":" + std::to_string(id) + (bodies[i].empty() ? "" : "," + bodies[i]) + "}\n";
  }
  std::vector<Label> labels(bodies.size());
  std::size_t written = 0;
  std::size_t answered = 0;
  const auto timeout_ms = static_cast<int>(options_.timeout.count());
  char buf[65536];

  const auto handle_line = [&](const std::string& line) {
    if (line.empty()) {
      return;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw fail("malformed response line: " + abbreviate(line));
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer() || !j.contains("label")) {
      throw fail("response lacks integer id or label: " + abbreviate(line));
    }
    const auto id = j["id"].get<std::uint64_t>();
    auto it = outstanding.find(id);
    if (it == outstanding.end()) {
      throw fail("response for unknown or already answered id " + std::to_string(id));
    }
    const auto& label = j["label"];
    labels[it->second] = label.is_string() ? label.get<std::string>() : label.dump();
    outstanding.erase(it);
    ++answered;
  };

  while (answered < bodies.size()) {
    pollfd fds[2];
    nfds_t n = 0;
    fds[n++] = {from_child_, POLLIN, 0};
    if (written < out.size()) {
      fds[n++] = {to_child_, POLLOUT, 0};
    }
    const int ready = poll(fds, n, timeout_ms);
    if (ready < 0) {
      if (errno == EINTR) {
        continue;
      }
      throw fail(std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) {
      std::string missing;
      std::size_t shown = 0;
      for (const auto& [id, idx] : outstanding) {
        if (shown++ < 5) {
          missing += (missing.empty() ? "" : ", ") + std::to_string(id);
        }
      }
      throw fail("timed out after " + std::to_string(timeout_ms) + " ms with " +
                 std::to_string(outstanding.size()) + " responses missing (ids " + missing +
                 (outstanding.size() > 5 ? ", ..." : "") + ")");
    }
    if (n > 1 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const auto w = ::write(to_child_, out.data() + written, out.size() - written);
      if (w < 0 && errno != EAGAIN && errno != EINTR) {
        int status = 0;
        waitpid(pid_, &status, 0);
        pid_ = -1;
        throw fail("process exited (" + describe_status(status) + ") while receiving requests");
      }
      if (w > 0) {
        written += static_cast<std::size_t>(w);
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      const auto r = ::read(from_child_, buf, sizeof(buf));
      if (r == 0) {
        int status = 0;
        waitpid(pid_, &status, 0);
        pid_ = -1;
        throw fail("process exited (" + describe_status(status) + ") with " + std::to_string(outstanding.size()) +
                   " of " + std::to_string(bodies.size()) + " responses outstanding");
      }
      if (r < 0 && errno != EAGAIN && errno != EINTR) {
        throw fail(std::string("read failed: ") + std::strerror(errno));
      }
      if (r > 0) {
        pending_input_.append(buf, static_cast<std::size_t>(r));
        std::size_t start = 0;
        for (auto nl = pending_input_.find('\n'); nl != std::string::npos;
             nl = pending_input_.find('\n', start)) {
          auto line = pending_input_.substr(start, nl - start);
          if (!line.empty() && line.back() == '\r') {
            line.pop_back();
          }
          start = nl + 1;
          handle_line(line);
        }
        pending_input_.erase(0, start);
      }
    }
  }
  return labels;
}

SubprocessStructuredOracle::SubprocessStructuredOracle(std::shared_ptr<SubprocessClient> client,
                                                       FeatureSchema schema)
    : client_(std::move(client)), schema_(std::move(schema)) {}

std::vector<Label> SubprocessStructuredOracle::predict_batch(std::span<const FeatureVector> samples) {
  std::vector<std::string> bodies;
  bodies.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.size() != schema_.size()) {
      throw OracleError("sample width does not match the schema");
    }
    nlohmann::json features = nlohmann::json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& spec = schema_.feature(i);
      if (spec.is_categorical()) {
        features.push_back(spec.categorical().values.at(static_cast<std::size_t>(s[i])));
      } else {
        features.push_back(s[i]);
      }
    }
    bodies.push_back("\"features\":" + features.dump());
  }
  return client_->exchange(bodies);
}

SubprocessTextOracle::SubprocessTextOracle(std::shared_ptr<SubprocessClient> client) : client_(std::move(client)) {}

std::vector<Label> SubprocessTextOracle::predict_batch(std::span<const TokenSequence> samples) {
  std::vector<std::string> bodies;
  bodies.reserve(samples.size());
  for (const auto& s : samples) {
    bodies.push_back("\"tokens\":" + nlohmann::json(s).dump());
  }
  return client_->exchange(bodies);
}

} // namespace fairprobe
