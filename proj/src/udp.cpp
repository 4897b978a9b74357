#include "nc/udp.hpp"

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <system_error>
#include <thread>

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace nc {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
    throw std::system_error(errno, std::generic_category(), what);
}

constexpr std::size_t kMaxDatagram = 65535;

} // namespace

SockAddr::SockAddr() {
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    sa.sin_port = 0;
}

SockAddr::SockAddr(std::uint32_t host_be, std::uint16_t port) {
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = host_be;
    sa.sin_port = htons(port);
}

SockAddr SockAddr::loopback(std::uint16_t port) {
    return SockAddr(htonl(INADDR_LOOPBACK), port);
}

SockAddr SockAddr::any(std::uint16_t port) {
    return SockAddr(htonl(INADDR_ANY), port);
}

SockAddr SockAddr::parse(const std::string& text, std::uint16_t default_port) {
    std::string host;
    std::string port_str;
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) {
        // bare port or bare host
        if (!text.empty() && text.find_first_not_of("0123456789") == std::string::npos)
            port_str = text;
        else
            host = text;
    } else {
        host = text.substr(0, colon);
        port_str = text.substr(colon + 1);
    }
    std::uint16_t port = default_port;
    if (!port_str.empty()) {
        const unsigned long v = std::stoul(port_str);
        if (v > 65535)
            throw std::invalid_argument("udp: port out of range: " + text);
        port = static_cast<std::uint16_t>(v);
    }
    if (host.empty() || host == "localhost")
        return loopback(port);

    in_addr addr{};
    if (inet_pton(AF_INET, host.c_str(), &addr) == 1)
        return SockAddr(addr.s_addr, port);

    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_DGRAM;
    addrinfo* res = nullptr;
    const int rc = getaddrinfo(host.c_str(), nullptr, &hints, &res);
    if (rc != 0 || res == nullptr)
        throw std::runtime_error("udp: cannot resolve host: " + host);
    const auto* sin = reinterpret_cast<const sockaddr_in*>(res->ai_addr);
    SockAddr out(sin->sin_addr.s_addr, port);
    freeaddrinfo(res);
    return out;
}

std::uint16_t SockAddr::port() const { return ntohs(sa.sin_port); }

std::string SockAddr::to_string() const {
    char buf[INET_ADDRSTRLEN] = {0};
    inet_ntop(AF_INET, &sa.sin_addr, buf, sizeof(buf));
    return std::string(buf) + ":" + std::to_string(port());
}

bool SockAddr::operator==(const SockAddr& other) const {
    return sa.sin_addr.s_addr == other.sa.sin_addr.s_addr && sa.sin_port == other.sa.sin_port;
}

UdpSocket::UdpSocket() = default;

UdpSocket::~UdpSocket() {
    if (fd_ >= 0)
        ::close(fd_);
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(other.fd_) {
    other.fd_ = -1;
}

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0)
            ::close(fd_);
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

UdpSocket UdpSocket::create() {
    const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0)
        throw_errno("udp: socket");
    return UdpSocket(fd);
}

UdpSocket UdpSocket::bind(const SockAddr& addr) {
    UdpSocket s = create();
    if (::bind(s.fd_, reinterpret_cast<const sockaddr*>(&addr.sa), sizeof(addr.sa)) != 0)
        throw_errno("udp: bind " + addr.to_string());
    return s;
}

UdpSocket UdpSocket::bind_loopback(std::uint16_t port) {
    return bind(SockAddr::loopback(port));
}

SockAddr UdpSocket::local_addr() const {
    SockAddr out;
    socklen_t len = sizeof(out.sa);
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&out.sa), &len) != 0)
        throw_errno("udp: getsockname");
    return out;
}

void UdpSocket::set_buffer_sizes(int bytes) {
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &bytes, sizeof(bytes));
    ::setsockopt(fd_, SOL_SOCKET, SO_SNDBUF, &bytes, sizeof(bytes));
}

void UdpSocket::send_to(const SockAddr& dest, std::span<const std::uint8_t> payload) {
    const ssize_t n = ::sendto(fd_, payload.data(), payload.size(), 0,
                               reinterpret_cast<const sockaddr*>(&dest.sa), sizeof(dest.sa));
    if (n < 0) {
        if (errno == ECONNREFUSED || errno == EAGAIN || errno == ENOBUFS)
            return;  // datagram service: peer absent or transient pressure
        throw_errno("udp: sendto " + dest.to_string());
    }
}

std::optional<std::vector<std::uint8_t>> UdpSocket::recv(int timeout_ms, SockAddr* from) {
    pollfd pfd{fd_, POLLIN, 0};
    const int pr = ::poll(&pfd, 1, timeout_ms);
    if (pr < 0) {
        if (errno == EINTR)
            return std::nullopt;
        throw_errno("udp: poll");
    }
    if (pr == 0 || !(pfd.revents & POLLIN))
        return std::nullopt;

    std::vector<std::uint8_t> buf(kMaxDatagram);
    sockaddr_in src{};
    socklen_t src_len = sizeof(src);
    const ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), 0,
                                 reinterpret_cast<sockaddr*>(&src), &src_len);
    if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR ||
            errno == ECONNREFUSED)
            return std::nullopt;
        throw_errno("udp: recvfrom");
    }
    buf.resize(static_cast<std::size_t>(n));
    if (from != nullptr) {
        from->sa = src;
    }
    return buf;
}

std::int64_t monotonic_us() {
    static const auto start = std::chrono::steady_clock::now();
    const auto now = std::chrono::steady_clock::now();
    return static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(now - start).count());
}

void sleep_until_us(std::int64_t deadline_us) {
    for (;;) {
        const std::int64_t now = monotonic_us();
        if (now >= deadline_us)
            return;
        const std::int64_t remain = deadline_us - now;
        if (remain > 200) {
            std::this_thread::sleep_for(std::chrono::microseconds(remain - 100));
        } else {
            std::this_thread::yield();
        }
    }
}

} // namespace nc
