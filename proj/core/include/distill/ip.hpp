#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace distill {

/// IPv4 or IPv6 address. IPv4-mapped IPv6 addresses are canonicalized to IPv4
/// so that ::ffff:10.0.0.1 and 10.0.0.1 compare equal.
class IpAddress {
 public:
  IpAddress() = default;

  static std::optional<IpAddress> parse(std::string_view text);
  static IpAddress v4(std::uint32_t host_order);
  static IpAddress from_bytes(const std::array<std::uint8_t, 16>& bytes, bool v4);

  bool is_v4() const noexcept { return v4_; }
  std::string to_string() const;
  const std::array<std::uint8_t, 16>& bytes() const noexcept { return bytes_; }

  friend auto operator<=>(const IpAddress&, const IpAddress&) = default;

 private:
  // v4 addresses live in bytes_[0..3]; the rest is zero.
  std::array<std::uint8_t, 16> bytes_{};
  bool v4_ = true;
};

class Cidr {
 public:
  static std::optional<Cidr> parse(std::string_view text);

  bool contains(const IpAddress& ip) const;
  std::string to_string() const;
  const IpAddress& network() const noexcept { return network_; }
  int prefix() const noexcept { return prefix_; }

  friend auto operator<=>(const Cidr&, const Cidr&) = default;

 private:
  IpAddress network_;  // host bits cleared
  int prefix_ = 0;
};

/// Address ranges that count as internal assets.
struct NetworkConfig {
  std::vector<Cidr> internal;

  bool is_internal(const IpAddress& ip) const;

  /// 10/8, 172.16/12, 192.168/16, fc00::/7.
  static NetworkConfig private_ranges();
};

/// Kronecker delta over canonicalized addresses.
int ip_correlation(const IpAddress& a, const IpAddress& b) noexcept;

}  // namespace distill
