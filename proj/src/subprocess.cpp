#include "migrado/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <utility>

#include "migrado/error.hpp"

extern char** environ;

namespace migrado {

namespace {

constexpr std::size_t kStderrCap = 64 * 1024;

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Fd& operator=(Fd&& other) noexcept {
    reset();
    fd_ = std::exchange(other.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }

  int get() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read;
  Fd write;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw Error(Errc::converter_crashed, "pipe: " + std::string(std::strerror(errno)));
  return Pipe{Fd(fds[0]), Fd(fds[1])};
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

void ignore_sigpipe_once() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, ByteView input, std::chrono::milliseconds timeout) {
  if (argv.empty()) throw Error(Errc::converter_crashed, "empty command");
  ignore_sigpipe_once();

  Pipe in = make_pipe();
  Pipe out = make_pipe();
  Pipe err = make_pipe();

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in.read.get(), 0);
  posix_spawn_file_actions_adddup2(&actions, out.write.get(), 1);
  posix_spawn_file_actions_adddup2(&actions, err.write.get(), 2);

  // The child gets default SIGPIPE handling and an empty signal mask, even
  // if this process ignores or blocks signals.
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  sigset_t defaults;
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGPIPE);
  posix_spawnattr_setsigdefault(&attr, &defaults);
  sigset_t empty;
  sigemptyset(&empty);
  posix_spawnattr_setsigmask(&attr, &empty);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETSIGDEF | POSIX_SPAWN_SETSIGMASK);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = 0;
  int rc = ::posix_spawnp(&pid, args[0], &actions, &attr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) throw Error(Errc::converter_crashed, "cannot start " + argv[0] + ": " + std::strerror(rc));

  in.read.reset();
  out.write.reset();
  err.write.reset();
  set_nonblocking(in.write.get());
  set_nonblocking(out.read.get());
  set_nonblocking(err.read.get());

  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::size_t written = 0;
  if (input.empty()) in.write.reset();

  auto remaining_ms = [&]() -> int {
    auto left = std::chrono::ceil<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    return left.count() > 0 ? static_cast<int>(left.count()) : 0;
  };

  char buf[65536];
  while (out.read.valid() || err.read.valid() || in.write.valid()) {
    int wait = remaining_ms();
    if (wait == 0) {
      result.timed_out = true;
      break;
    }
    pollfd fds[3];
    nfds_t n = 0;
    int out_slot = -1, err_slot = -1, in_slot = -1;
    if (out.read.valid()) { out_slot = static_cast<int>(n); fds[n++] = {out.read.get(), POLLIN, 0}; }
    if (err.read.valid()) { err_slot = static_cast<int>(n); fds[n++] = {err.read.get(), POLLIN, 0}; }
    if (in.write.valid()) { in_slot = static_cast<int>(n); fds[n++] = {in.write.get(), POLLOUT, 0}; }
    int ready = ::poll(fds, n, wait);
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (ready == 0) continue;

    if (in_slot >= 0 && fds[in_slot].revents) {
      ssize_t w = ::write(in.write.get(), input.data() + written, input.size() - written);
      if (w > 0) {
        written += static_cast<std::size_t>(w);
        if (written == input.size()) in.write.reset();
      } else if (w < 0 && errno != EAGAIN && errno != EINTR) {
        in.write.reset();  // reader went away (EPIPE)
      }
    }
    if (out_slot >= 0 && fds[out_slot].revents) {
      ssize_t r = ::read(out.read.get(), buf, sizeof buf);
      if (r > 0) {
        result.stdout_bytes.insert(result.stdout_bytes.end(), buf, buf + r);
      } else if (r == 0 || (errno != EAGAIN && errno != EINTR)) {
        out.read.reset();
      }
    }
    if (err_slot >= 0 && fds[err_slot].revents) {
      ssize_t r = ::read(err.read.get(), buf, sizeof buf);
      if (r > 0) {
        std::size_t room = kStderrCap - std::min(kStderrCap, result.stderr_text.size());
        result.stderr_text.append(buf, std::min(room, static_cast<std::size_t>(r)));
      } else if (r == 0 || (errno != EAGAIN && errno != EINTR)) {
        err.read.reset();
      }
    }
  }

  int status = 0;
  if (!result.timed_out) {
    // Output is closed; give the process until the deadline to exit.
    for (;;) {
      pid_t w = ::waitpid(pid, &status, WNOHANG);
      if (w == pid) break;
      if (w < 0 && errno != EINTR) break;
      if (remaining_ms() == 0) {
        result.timed_out = true;
        break;
      }
      ::usleep(1000);
    }
  }
  if (result.timed_out) {
    ::kill(pid, SIGKILL);
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    return result;
  }
  if (WIFEXITED(status)) {
    result.exited = true;
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.signal = WTERMSIG(status);
  }
  return result;
}

}  // namespace migrado
