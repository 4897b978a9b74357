#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <netinet/in.h>

// Thin RAII layer over IPv4 UDP sockets: bind, sendto, and a poll-based
// receive with timeout. Everything the proxies, the channel emulator and
// the traffic tools need, and nothing more.

namespace nc {

struct SockAddr {
    sockaddr_in sa{};

    SockAddr();
    SockAddr(std::uint32_t host_be, std::uint16_t port);

    // "host:port" or "port"; host may be a name, dotted quad, or empty
    // (loopback). Throws std::invalid_argument / std::runtime_error.
    static SockAddr parse(const std::string& text, std::uint16_t default_port = 0);
    static SockAddr loopback(std::uint16_t port);
    static SockAddr any(std::uint16_t port);

    std::uint16_t port() const;
    std::string to_string() const;
    bool operator==(const SockAddr& other) const;
};

class UdpSocket {
public:
    UdpSocket();
    ~UdpSocket();
    UdpSocket(UdpSocket&& other) noexcept;
    UdpSocket& operator=(UdpSocket&& other) noexcept;
    UdpSocket(const UdpSocket&) = delete;
    UdpSocket& operator=(const UdpSocket&) = delete;

    static UdpSocket create();
    // port 0 binds an ephemeral port; query it with local_addr().
    static UdpSocket bind(const SockAddr& addr);
    static UdpSocket bind_loopback(std::uint16_t port = 0);

    SockAddr local_addr() const;
    void set_buffer_sizes(int bytes);

    void send_to(const SockAddr& dest, std::span<const std::uint8_t> payload);

    // Blocks up to timeout_ms (0 = just poll, <0 = wait forever). Returns
    // nullopt on timeout. Truncated oversize datagrams are dropped.
    std::optional<std::vector<std::uint8_t>> recv(int timeout_ms,
                                                  SockAddr* from = nullptr);

    int fd() const { return fd_; }

private:
    explicit UdpSocket(int fd) : fd_(fd) {}
    int fd_ = -1;
};

// Monotonic clock in microseconds since process start.
std::int64_t monotonic_us();

void sleep_until_us(std::int64_t deadline_us);

} // namespace nc
