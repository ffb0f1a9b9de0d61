// External-command detection backend (POSIX).

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <string>

#include "crackinspect/error.hpp"
#include "crackinspect/ingest.hpp"

namespace crackinspect {

namespace {

struct ChildOutput {
  int exit_status = -1;  // -1 when killed by a signal
  bool timed_out = false;
  std::string out;
  std::string err;
};

class Pipe {
 public:
  Pipe() {
    if (::pipe2(fds_, O_CLOEXEC) != 0) {
      throw Error(ErrorCode::Backend, std::string("pipe failed: ") + std::strerror(errno));
    }
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;

  int read_end() const { return fds_[0]; }
  int write_end() const { return fds_[1]; }
  void close_read() { close_fd(fds_[0]); }
  void close_write() { close_fd(fds_[1]); }

 private:
  static void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
  int fds_[2] = {-1, -1};
};

ChildOutput run_shell(const std::string& command, const std::string& argument,
                      std::chrono::milliseconds timeout) {
  Pipe out_pipe;
  Pipe err_pipe;
  const std::string script = command + " \"$1\"";

  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::Backend, std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(out_pipe.write_end(), STDOUT_FILENO);
    ::dup2(err_pipe.write_end(), STDERR_FILENO);
    const int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    ::execl("/bin/sh", "sh", "-c", script.c_str(), "crackinspect-detector", argument.c_str(),
            static_cast<char*>(nullptr));
    ::_exit(127);
  }
  out_pipe.close_write();
  err_pipe.close_write();

  ChildOutput result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::array<pollfd, 2> fds{pollfd{out_pipe.read_end(), POLLIN, 0},
                            pollfd{err_pipe.read_end(), POLLIN, 0}};
  std::array<std::string*, 2> sinks{&result.out, &result.err};
  int open_streams = 2;
  char buf[4096];
  while (open_streams > 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      result.timed_out = true;
      break;
    }
    const int ready = ::poll(fds.data(), fds.size(), static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (std::size_t k = 0; k < fds.size(); ++k) {
      if (fds[k].fd < 0 || fds[k].revents == 0) continue;
      const ssize_t n = ::read(fds[k].fd, buf, sizeof buf);
      if (n > 0) {
        sinks[k]->append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        fds[k].fd = -1;
        --open_streams;
      }
    }
  }

  int status = 0;
  while (!result.timed_out) {
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) break;
    if (std::chrono::steady_clock::now() >= deadline) {
      result.timed_out = true;
      break;
    }
    ::usleep(2000);
  }
  if (result.timed_out) {
    ::kill(-pid, SIGKILL);
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    return result;
  }
  result.exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string diagnostics(const ChildOutput& child) {
  std::string err = child.err;
  if (err.size() > 2000) err = err.substr(err.size() - 2000);
  return err.empty() ? std::string() : "\nstderr:\n" + err;
}

}  // namespace

std::vector<CrackInstance> run_external_detector(const ExternalCommandOptions& options,
                                                 const ImageRecord& image) {
  if (options.command.empty()) throw Error(ErrorCode::Backend, "no detector command configured");
  const auto child = run_shell(options.command, image.path.string(), options.timeout);
  if (child.timed_out) {
    throw Error(ErrorCode::Backend, "detector timed out after " +
                                        std::to_string(options.timeout.count()) + " ms on " +
                                        image.filename() + diagnostics(child));
  }
  if (child.exit_status != 0) {
    throw Error(ErrorCode::Backend, "detector exited with status " +
                                        std::to_string(child.exit_status) + " on " +
                                        image.filename() + diagnostics(child));
  }
  try {
    const auto doc = parse_annotations(child.out, "detector output for " + image.filename());
    return instances_from_document(doc, image).instances;
  } catch (const Error& e) {
    throw Error(ErrorCode::Backend, std::string(e.what()) + diagnostics(child));
  }
}

}  // namespace crackinspect
