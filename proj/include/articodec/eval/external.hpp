// Copyright (c) 2026 The articodec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "articodec/core/binary_io.hpp"
#include "articodec/core/digest.hpp"
#include "articodec/core/error.hpp"
#include "articodec/core/log.hpp"
#include "articodec/core/wav.hpp"

namespace articodec::eval {

// Out-of-process scorer (ASR transcript or quality score). score() returns
// the raw text answer for one wav file.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::string id() const = 0;
  virtual bool available() const = 0;
  virtual std::string score(const std::filesystem::path& wav) const = 0;
};

class ScorerTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline bool executable(const std::filesystem::path& p) { return ::access(p.c_str(), X_OK) == 0; }

inline bool on_path(const std::string& prog) {
  if (prog.find('/') != std::string::npos) return executable(prog);
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::string_view rest(path);
  while (true) {
    const auto c = rest.find(':');
    const auto dir = rest.substr(0, c);
    if (!dir.empty() && executable(std::filesystem::path(dir) / prog)) return true;
    if (c == std::string_view::npos) return false;
    rest = rest.substr(c + 1);
  }
}

inline std::string trim_output(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  return s.substr(b);
}

}  // namespace detail

// Runs `argv... <wav>` and reads the answer from stdout. Non-zero exit is an
// error; exceeding the timeout kills the child.
class SubprocessScorer : public Scorer {
 public:
  SubprocessScorer(std::vector<std::string> argv, std::chrono::milliseconds timeout = std::chrono::seconds(120))
      : argv_(std::move(argv)), timeout_(timeout) {
    if (argv_.empty()) throw usage_error("scorer command is empty");
  }

  std::string id() const override {
    std::string s;
    for (const auto& a : argv_) s += a + '\x1f';
    return s;
  }

  bool available() const override { return detail::on_path(argv_.front()); }

  std::string score(const std::filesystem::path& wav) const override {
    int fds[2];
    if (::pipe(fds) != 0) throw std::runtime_error("pipe failed");
    std::vector<std::string> args = argv_;
    args.push_back(wav.string());
    std::vector<char*> cargs;
    for (auto& a : args) cargs.push_back(a.data());
    cargs.push_back(nullptr);
    const pid_t pid = ::fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
      ::close(fds[0]);
      ::dup2(fds[1], STDOUT_FILENO);
      ::close(fds[1]);
      ::execvp(cargs[0], cargs.data());
      ::_exit(127);
    }
    ::close(fds[1]);
    std::string out;
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    bool timed_out = false;
    char buf[4096];
    while (true) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        timed_out = true;
        break;
      }
      pollfd p{fds[0], POLLIN, 0};
      const int r = ::poll(&p, 1, static_cast<int>(left.count()));
      if (r == 0) {
        timed_out = true;
        break;
      }
      if (r < 0) {
        if (errno == EINTR) continue;
        break;
      }
      const auto n = ::read(fds[0], buf, sizeof buf);
      if (n <= 0) break;
      out.append(buf, static_cast<std::size_t>(n));
    }
    ::close(fds[0]);
    if (timed_out) ::kill(pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
    if (timed_out) throw ScorerTimeout("scorer timed out after " + std::to_string(timeout_.count()) + " ms");
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      throw std::runtime_error("scorer exited with status " + std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
    }
    return detail::trim_output(out);
  }

 private:
  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
};

// One file per key under `dir`, written atomically.
class ScoreCache {
 public:
  explicit ScoreCache(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  std::optional<std::string> get(const std::string& key) const {
    const auto p = dir_ / key;
    if (!std::filesystem::exists(p)) return std::nullopt;
    return read_file(p);
  }
  void put(const std::string& key, const std::string& value) const { write_file_atomic(dir_ / key, value); }

 private:
  std::filesystem::path dir_;
};

struct ScoreItem {
  std::string id;
  std::optional<std::string> value;
  std::string error;  // set when value is empty
};

struct ScoreRun {
  bool skipped = false;
  std::string reason;
  std::vector<ScoreItem> items;
};

struct NamedWave {
  std::string id;
  Waveform wave;
};

// Content key: scorer identity plus the exact wav bytes handed to it.
inline std::string score_key(const Scorer& scorer, const std::string& wav_bytes) {
  return sha256_hex(scorer.id() + '\0' + wav_bytes);
}

// A missing scorer marks the run skipped rather than failing it. Per-item
// failures (timeouts included) are recorded and the run continues.
inline ScoreRun score_external(const std::vector<NamedWave>& waves, const Scorer& scorer, const ScoreCache* cache) {
  ScoreRun run;
  if (!scorer.available()) {
    run.skipped = true;
    run.reason = "scorer not available";
    warn("external scorer not available, metric skipped");
    return run;
  }
  const auto tmp = std::filesystem::temp_directory_path() /
                   ("articodec-score-" + std::to_string(::getpid()) + ".wav");
  for (const auto& w : waves) {
    ScoreItem item{w.id, std::nullopt, {}};
    const auto bytes = encode_wav(w.wave, WavEncoding::kPcm16);
    const auto key = score_key(scorer, bytes);
    if (cache) item.value = cache->get(key);
    if (!item.value) {
      try {
        write_file_atomic(tmp, bytes);
        item.value = scorer.score(tmp);
        if (cache) cache->put(key, *item.value);
      } catch (const std::exception& e) {
        item.error = e.what();
        warn("scorer failed on '" + w.id + "': " + item.error);
      }
    }
    run.items.push_back(std::move(item));
  }
  std::error_code ec;
  std::filesystem::remove(tmp, ec);
  return run;
}

}  // namespace articodec::eval
