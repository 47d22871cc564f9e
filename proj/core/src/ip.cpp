#include "distill/ip.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <charconv>
#include <cstring>

namespace distill {

std::optional<IpAddress> IpAddress::parse(std::string_view text) {
  if (text.empty() || text.size() > 64) return std::nullopt;
  const std::string buf(text);
  IpAddress ip;
  in_addr a4{};
  if (inet_pton(AF_INET, buf.c_str(), &a4) == 1) {
    std::memcpy(ip.bytes_.data(), &a4, 4);
    ip.v4_ = true;
    return ip;
  }
  in6_addr a6{};
  if (inet_pton(AF_INET6, buf.c_str(), &a6) == 1) {
    std::array<std::uint8_t, 16> raw{};
    std::memcpy(raw.data(), &a6, 16);
    static constexpr std::array<std::uint8_t, 12> kMapped = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0xff, 0xff};
    if (std::memcmp(raw.data(), kMapped.data(), 12) == 0) {
      std::memcpy(ip.bytes_.data(), raw.data() + 12, 4);
      ip.v4_ = true;
    } else {
      ip.bytes_ = raw;
      ip.v4_ = false;
    }
    return ip;
  }
  return std::nullopt;
}

IpAddress IpAddress::v4(std::uint32_t host_order) {
  IpAddress ip;
  ip.bytes_[0] = static_cast<std::uint8_t>(host_order >> 24);
  ip.bytes_[1] = static_cast<std::uint8_t>(host_order >> 16);
  ip.bytes_[2] = static_cast<std::uint8_t>(host_order >> 8);
  ip.bytes_[3] = static_cast<std::uint8_t>(host_order);
  return ip;
}

IpAddress IpAddress::from_bytes(const std::array<std::uint8_t, 16>& bytes, bool v4) {
  IpAddress ip;
  ip.bytes_ = bytes;
  ip.v4_ = v4;
  if (v4) std::fill(ip.bytes_.begin() + 4, ip.bytes_.end(), std::uint8_t{0});
  return ip;
}

std::string IpAddress::to_string() const {
  char buf[INET6_ADDRSTRLEN] = {};
  if (v4_) {
    inet_ntop(AF_INET, bytes_.data(), buf, sizeof(buf));
  } else {
    inet_ntop(AF_INET6, bytes_.data(), buf, sizeof(buf));
  }
  return buf;
}

std::optional<Cidr> Cidr::parse(std::string_view text) {
  const auto slash = text.find('/');
  auto ip = IpAddress::parse(text.substr(0, slash));
  if (!ip) return std::nullopt;
  const int width = ip->is_v4() ? 32 : 128;
  int prefix = width;
  if (slash != std::string_view::npos) {
    auto digits = text.substr(slash + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), prefix);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
    if (prefix < 0 || prefix > width) return std::nullopt;
  }
  Cidr cidr;
  cidr.prefix_ = prefix;
  cidr.network_ = *ip;
  auto bytes = ip->bytes();
  for (int bit = prefix; bit < width; ++bit) bytes[bit / 8] &= static_cast<std::uint8_t>(~(0x80u >> (bit % 8)));
  cidr.network_ = IpAddress::from_bytes(bytes, ip->is_v4());
  return cidr;
}

bool Cidr::contains(const IpAddress& ip) const {
  if (ip.is_v4() != network_.is_v4()) return false;
  const auto& a = ip.bytes();
  const auto& n = network_.bytes();
  for (int bit = 0; bit < prefix_; ++bit) {
    const std::uint8_t mask = static_cast<std::uint8_t>(0x80u >> (bit % 8));
    if ((a[bit / 8] & mask) != (n[bit / 8] & mask)) return false;
  }
  return true;
}

std::string Cidr::to_string() const { return network_.to_string() + "/" + std::to_string(prefix_); }

bool NetworkConfig::is_internal(const IpAddress& ip) const {
  for (const auto& c : internal)
    if (c.contains(ip)) return true;
  return false;
}

NetworkConfig NetworkConfig::private_ranges() {
  NetworkConfig net;
  for (const char* text : {"10.0.0.0/8", "172.16.0.0/12", "192.168.0.0/16", "fc00::/7"}) net.internal.push_back(*Cidr::parse(text));
  return net;
}

int ip_correlation(const IpAddress& a, const IpAddress& b) noexcept { return a == b ? 1 : 0; }

}  // namespace distill
