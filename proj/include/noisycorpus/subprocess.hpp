// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <string>
#include <vector>

#include "noisycorpus/errors.hpp"
#include "noisycorpus/noise.hpp"

namespace noisycorpus {

struct CommandSpec {
  std::vector<std::string> argv;
  std::chrono::milliseconds timeout{60000};  // inactivity timeout
};

namespace detail {

inline void ignore_sigpipe_once() {
  static const bool done = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

struct Fd {
  int fd = -1;
  Fd() = default;
  explicit Fd(int f) : fd(f) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd(o.fd) { o.fd = -1; }
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
  int release() {
    int f = fd;
    fd = -1;
    return f;
  }
};

}  // namespace detail

// Runs a child process as a line filter: writes one line per input string,
// closes stdin, reads the full output. Both pipes are pumped concurrently so
// arbitrarily large batches cannot deadlock. Startup failure, inactivity
// timeout, nonzero exit and line-count mismatch raise distinct messages.
inline std::vector<std::string> run_line_filter(const CommandSpec& cmd,
                                                const std::vector<std::string>& lines) {
  if (cmd.argv.empty()) throw ProcessError("empty command");
  detail::ignore_sigpipe_once();

  int in_pipe[2], out_pipe[2], status_pipe[2];
  if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe(status_pipe) != 0)
    throw ProcessError(std::string("pipe: ") + std::strerror(errno));

  pid_t pid = ::fork();
  if (pid < 0) throw ProcessError(std::string("fork: ") + std::strerror(errno));

  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::close(status_pipe[0]);
    ::fcntl(status_pipe[1], F_SETFD, FD_CLOEXEC);
    std::vector<char*> argv;
    for (const auto& a : cmd.argv) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    ::execvp(argv[0], argv.data());
    int err = errno;
    ssize_t ignored = ::write(status_pipe[1], &err, sizeof err);
    (void)ignored;
    ::_exit(127);
  }

  detail::Fd child_stdin(in_pipe[1]);
  detail::Fd child_stdout(out_pipe[0]);
  detail::Fd status_read(status_pipe[0]);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(status_pipe[1]);

  // Startup check: exec success closes the status pipe without a byte.
  {
    int err = 0;
    ssize_t k = ::read(status_read.fd, &err, sizeof err);
    if (k == static_cast<ssize_t>(sizeof err)) {
      ::waitpid(pid, nullptr, 0);
      throw ProcessError("failed to start '" + cmd.argv[0] + "': " + std::strerror(err));
    }
  }
  status_read.reset();

  std::string input;
  for (const auto& line : lines) {
    input += line;
    input += '\n';
  }

  ::fcntl(child_stdin.fd, F_SETFL, O_NONBLOCK);
  ::fcntl(child_stdout.fd, F_SETFL, O_NONBLOCK);

  std::string output;
  std::size_t written = 0;
  bool failed = false;
  std::string failure;
  while (child_stdout.fd >= 0 || child_stdin.fd >= 0) {
    struct pollfd fds[2];
    nfds_t nfds = 0;
    int out_slot = -1, in_slot = -1;
    if (child_stdout.fd >= 0) {
      out_slot = static_cast<int>(nfds);
      fds[nfds++] = {child_stdout.fd, POLLIN, 0};
    }
    if (child_stdin.fd >= 0) {
      in_slot = static_cast<int>(nfds);
      fds[nfds++] = {child_stdin.fd, POLLOUT, 0};
    }
    int rc = ::poll(fds, nfds, static_cast<int>(cmd.timeout.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      failed = true;
      failure = std::string("poll: ") + std::strerror(errno);
      break;
    }
    if (rc == 0) {
      failed = true;
      failure = "timeout: no child activity within " +
                std::to_string(cmd.timeout.count()) + " ms";
      break;
    }
    if (in_slot >= 0 && (fds[in_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
      if (written < input.size()) {
        ssize_t k = ::write(child_stdin.fd, input.data() + written, input.size() - written);
        if (k > 0) {
          written += static_cast<std::size_t>(k);
        } else if (k < 0 && errno != EAGAIN && errno != EINTR) {
          // Child closed its stdin early; keep draining stdout.
          child_stdin.reset();
        }
      }
      if (written == input.size()) child_stdin.reset();  // EOF flushes the batch
    }
    if (out_slot >= 0 && (fds[out_slot].revents & (POLLIN | POLLERR | POLLHUP))) {
      char buf[65536];
      ssize_t k = ::read(child_stdout.fd, buf, sizeof buf);
      if (k > 0) {
        output.append(buf, static_cast<std::size_t>(k));
      } else if (k == 0) {
        child_stdout.reset();
      } else if (errno != EAGAIN && errno != EINTR) {
        failed = true;
        failure = std::string("read: ") + std::strerror(errno);
        break;
      }
    }
  }

  int wstatus = 0;
  if (failed) {
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &wstatus, 0);
    throw ProcessError("command '" + cmd.argv[0] + "' failed: " + failure);
  }
  ::waitpid(pid, &wstatus, 0);
  if (WIFSIGNALED(wstatus))
    throw ProcessError("command '" + cmd.argv[0] + "' killed by signal " +
                       std::to_string(WTERMSIG(wstatus)));
  if (WIFEXITED(wstatus) && WEXITSTATUS(wstatus) != 0)
    throw ProcessError("command '" + cmd.argv[0] + "' exited with status " +
                       std::to_string(WEXITSTATUS(wstatus)));

  std::vector<std::string> out_lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i < output.size(); ++i) {
    if (output[i] == '\n') {
      std::size_t end = i;
      if (end > start && output[end - 1] == '\r') --end;
      out_lines.emplace_back(output.substr(start, end - start));
      start = i + 1;
    }
  }
  if (start < output.size()) out_lines.emplace_back(output.substr(start));

  if (out_lines.size() != lines.size())
    throw ProcessError("line count mismatch from '" + cmd.argv[0] + "': expected " +
                       std::to_string(lines.size()) + ", got " +
                       std::to_string(out_lines.size()));
  return out_lines;
}

// ---------------------------------------------------------------------------
// External generator: the seq2seq encoding schema over the line protocol.
// ---------------------------------------------------------------------------

struct ExternalGenerator {
  CommandSpec command;
  enum class Mode { Sentence, Token } mode = Mode::Sentence;
};

// One encoded line per input, order- and count-preserving; outputs decoded
// back from the schema.
inline std::vector<std::string> external_generate(const ExternalGenerator& gen,
                                                  const std::vector<std::string>& inputs) {
  std::vector<std::string> encoded;
  encoded.reserve(inputs.size());
  for (const auto& s : inputs) encoded.push_back(encode_for_seq2seq(s));
  std::vector<std::string> raw = run_line_filter(gen.command, encoded);
  std::vector<std::string> out;
  out.reserve(raw.size());
  for (const auto& s : raw) out.push_back(decode_from_seq2seq(s));
  return out;
}

}  // namespace noisycorpus
