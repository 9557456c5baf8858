#include "mimocc/channel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mimocc/rng.hpp"

namespace mimocc {

const Eigen::MatrixXcd& ChannelSet::of(int user) const {
  return H[index_of(user)];
}

int ChannelSet::index_of(int user) const {
  for (size_t i = 0; i < users.size(); ++i)
    if (users[i] == user) return static_cast<int>(i);
  throw Error(Errc::unknown_user,
              "user " + std::to_string(user) + " not in channel set");
}

ChannelSet sample_channels(const NetworkConfig& config,
                           const std::vector<int>& users, std::uint64_t seed) {
  if (users.empty())
    throw Error(Errc::invalid_argument, "need at least one user");
  ChannelSet set;
  set.users = users;
  set.seed = seed;
  const std::uint64_t root =
      CounterRng::mix(seed + 0x9E3779B97F4A7C15ULL);
  for (int k : users) {
    CounterRng rng{CounterRng::substream(root, static_cast<std::uint64_t>(k))};
    Eigen::MatrixXcd h(config.G, config.L);
    for (int g = 0; g < config.G; ++g) {
      for (int l = 0; l < config.L; ++l) {
        const std::uint64_t entry = 2ULL * (g * config.L + l);
        const double u1 = rng.uniform_open(entry);
        const double u2 = rng.uniform(entry + 1);
        const double radius = std::sqrt(-std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        h(g, l) = std::complex<double>(radius * std::cos(angle),
                                       radius * std::sin(angle));
      }
    }
    set.H.push_back(std::move(h));
  }
  return set;
}

double snr_linear(const NetworkConfig& config) { return config.P_T / config.N0; }

double snr_db_to_linear(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

double snr_linear_to_db(double snr) { return 10.0 * std::log10(snr); }

std::string to_text(const ChannelSet& channels) {
  std::ostringstream os;
  os.precision(17);
  for (size_t i = 0; i < channels.users.size(); ++i) {
    const auto& h = channels.H[i];
    os << channels.users[i] << ' ' << h.rows() << ' ' << h.cols() << ' '
       << channels.seed << '\n';
    for (Eigen::Index g = 0; g < h.rows(); ++g) {
      for (Eigen::Index l = 0; l < h.cols(); ++l) {
        if (l) os << ' ';
        os << h(g, l).real() << ' ' << h(g, l).imag();
      }
      os << '\n';
    }
  }
  return os.str();
}

ChannelSet channels_from_text(const std::string& text) {
  std::istringstream is(text);
  ChannelSet set;
  int user, rows, cols;
  std::uint64_t seed;
  while (is >> user >> rows >> cols >> seed) {
    Eigen::MatrixXcd h(rows, cols);
    for (int g = 0; g < rows; ++g)
      for (int l = 0; l < cols; ++l) {
        double re, im;
        if (!(is >> re >> im))
          throw Error(Errc::io_error, "truncated channel text");
        h(g, l) = {re, im};
      }
    set.users.push_back(user);
    set.H.push_back(std::move(h));
    set.seed = seed;
  }
  if (set.users.empty()) throw Error(Errc::io_error, "empty channel text");
  return set;
}

}  // namespace mimocc
