#include "subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <string.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>

extern char** environ;

namespace parevo {

namespace {

struct Pipe {
    int rd = -1;
    int wr = -1;
    bool open_pair() {
        int fds[2];
        if (pipe(fds) != 0) return false;
        rd = fds[0];
        wr = fds[1];
        return true;
    }
    void close_rd() {
        if (rd >= 0) ::close(rd);
        rd = -1;
    }
    void close_wr() {
        if (wr >= 0) ::close(wr);
        wr = -1;
    }
    ~Pipe() {
        close_rd();
        close_wr();
    }
};

void set_nonblock(int fd) { fcntl(fd, F_SETFL, fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

void set_cloexec(int fd) { fcntl(fd, F_SETFD, fcntl(fd, F_GETFD, 0) | FD_CLOEXEC); }

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Environment block = parent env with spec.env overlaid. Built before fork;
// nothing is allocated between fork and exec.
std::vector<std::string> merged_env(const std::map<std::string, std::string>& extra) {
    std::vector<std::string> out;
    for (char** e = environ; *e; ++e) {
        std::string entry(*e);
        auto eq = entry.find('=');
        std::string name = eq == std::string::npos ? entry : entry.substr(0, eq);
        if (!extra.count(name)) out.push_back(std::move(entry));
    }
    for (const auto& [k, v] : extra) out.push_back(k + "=" + v);
    return out;
}

}  // namespace

ExecutionResult run_process(const RunSpec& spec) {
    ExecutionResult res;
    if (spec.argv.empty()) {
        res.spawn_failed = true;
        res.spawn_error = "empty argv";
        return res;
    }

    Pipe in, out, err, status;
    if (!in.open_pair() || !out.open_pair() || !err.open_pair() || !status.open_pair()) {
        res.spawn_failed = true;
        res.spawn_error = std::string("pipe: ") + strerror(errno);
        return res;
    }
    set_cloexec(status.wr);

    std::vector<std::string> env_store = merged_env(spec.env);
    std::vector<char*> envp;
    envp.reserve(env_store.size() + 1);
    for (auto& e : env_store) envp.push_back(e.data());
    envp.push_back(nullptr);

    std::vector<char*> argv;
    std::vector<std::string> argv_store = spec.argv;
    argv.reserve(argv_store.size() + 1);
    for (auto& a : argv_store) argv.push_back(a.data());
    argv.push_back(nullptr);

    auto start = std::chrono::steady_clock::now();
    pid_t pid = fork();
    if (pid < 0) {
        res.spawn_failed = true;
        res.spawn_error = std::string("fork: ") + strerror(errno);
        return res;
    }

    if (pid == 0) {
        setpgid(0, 0);
        dup2(in.rd, STDIN_FILENO);
        dup2(out.wr, STDOUT_FILENO);
        dup2(err.wr, STDERR_FILENO);
        in.close_rd();
        in.close_wr();
        out.close_rd();
        out.close_wr();
        err.close_rd();
        err.close_wr();
        status.close_rd();
        if (spec.cwd && chdir(spec.cwd->c_str()) != 0) {
            int e = errno;
            (void)!write(status.wr, &e, sizeof e);
            _exit(127);
        }
        execvpe(argv[0], argv.data(), envp.data());
        int e = errno;
        (void)!write(status.wr, &e, sizeof e);
        _exit(127);
    }

    in.close_rd();
    out.close_wr();
    err.close_wr();
    status.close_wr();
    set_nonblock(in.wr);
    set_nonblock(out.rd);
    set_nonblock(err.rd);

    std::size_t stdin_off = 0;
    if (spec.stdin_data.empty()) in.close_wr();

    bool killed = false;
    auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                std::chrono::duration<double>(spec.timeout_s));

    auto drain = [&](int fd, std::string& sink, bool& truncated) -> bool {
        // Returns false on EOF. Keeps reading past the cap so the child
        // never blocks on a full pipe.
        char buf[16384];
        for (;;) {
            ssize_t n = read(fd, buf, sizeof buf);
            if (n > 0) {
                std::size_t room = sink.size() < spec.capture_cap ? spec.capture_cap - sink.size() : 0;
                std::size_t take = std::min(room, static_cast<std::size_t>(n));
                sink.append(buf, take);
                if (take < static_cast<std::size_t>(n)) truncated = true;
                continue;
            }
            if (n == 0) return false;
            if (errno == EAGAIN || errno == EWOULDBLOCK) return true;
            return false;  // EPIPE etc: treat as closed
        }
    };

    bool out_open = true, err_open = true;
    while (out_open || err_open || in.wr >= 0) {
        auto now = std::chrono::steady_clock::now();
        if (!killed && now >= deadline) {
            kill(-pid, SIGKILL);
            killed = true;
            res.timed_out = true;
        }
        int wait_ms = 50;
        if (!killed) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
            wait_ms = static_cast<int>(std::max<long long>(1, std::min<long long>(left + 1, 200)));
        }

        pollfd fds[3];
        nfds_t nfds = 0;
        int idx_in = -1, idx_out = -1, idx_err = -1;
        if (in.wr >= 0) {
            idx_in = nfds;
            fds[nfds++] = {in.wr, POLLOUT, 0};
        }
        if (out_open) {
            idx_out = nfds;
            fds[nfds++] = {out.rd, POLLIN, 0};
        }
        if (err_open) {
            idx_err = nfds;
            fds[nfds++] = {err.rd, POLLIN, 0};
        }
        if (nfds == 0) break;
        int pr = poll(fds, nfds, wait_ms);
        if (pr < 0 && errno != EINTR) break;

        if (idx_in >= 0 && (fds[idx_in].revents & (POLLOUT | POLLERR | POLLHUP))) {
            if (fds[idx_in].revents & (POLLERR | POLLHUP)) {
                in.close_wr();
            } else {
                ssize_t n = write(in.wr, spec.stdin_data.data() + stdin_off, spec.stdin_data.size() - stdin_off);
                if (n > 0) stdin_off += static_cast<std::size_t>(n);
                if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK) in.close_wr();
                if (stdin_off >= spec.stdin_data.size()) in.close_wr();
            }
        }
        if (idx_out >= 0 && (fds[idx_out].revents & (POLLIN | POLLHUP | POLLERR)))
            out_open = drain(out.rd, res.stdout_text, res.stdout_truncated);
        if (idx_err >= 0 && (fds[idx_err].revents & (POLLIN | POLLHUP | POLLERR)))
            err_open = drain(err.rd, res.stderr_text, res.stderr_truncated);
    }

    // Pipes are closed; wait for exit, still enforcing the deadline in case
    // the child ignored its descriptors.
    int wstatus = 0;
    for (;;) {
        pid_t w = waitpid(pid, &wstatus, killed ? 0 : WNOHANG);
        if (w == pid) break;
        if (w < 0 && errno != EINTR) break;
        if (!killed && std::chrono::steady_clock::now() >= deadline) {
            kill(-pid, SIGKILL);
            killed = true;
            res.timed_out = true;
            continue;
        }
        if (w == 0) usleep(2000);
    }
    res.wall_time_s = seconds_since(start);

    int child_errno = 0;
    ssize_t sn = read(status.rd, &child_errno, sizeof child_errno);
    if (sn == static_cast<ssize_t>(sizeof child_errno)) {
        res.spawn_failed = true;
        res.spawn_error = spec.argv[0] + ": " + strerror(child_errno);
        return res;
    }

    if (WIFEXITED(wstatus)) res.exit_code = WEXITSTATUS(wstatus);
    if (WIFSIGNALED(wstatus)) res.term_signal = WTERMSIG(wstatus);
    return res;
}

}  // namespace parevo
