#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace art {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidFanout : Error {
  explicit InvalidFanout(std::uint64_t b)
      : Error("fanout " + std::to_string(b) + " is not of the form 2^(2^j)") {}
};

struct LabelOutOfRange : Error {
  using Error::Error;
};

struct InvalidCollection : Error {
  using Error::Error;
};

struct KeyOutOfUniverse : Error {
  explicit KeyOutOfUniverse(std::uint64_t k)
      : Error("key " + std::to_string(k) + " outside universe") {}
};

struct InvalidDistributionParameters : Error {
  using Error::Error;
};

struct InvalidRange : Error {
  using Error::Error;
};

struct EmptyCluster : Error {
  using Error::Error;
};

struct KeyOutsideCluster : Error {
  using Error::Error;
};

struct DuplicatePeerPosition : Error {
  using Error::Error;
};

struct UnknownPeer : Error {
  explicit UnknownPeer(std::uint64_t id)
      : Error("unknown peer " + std::to_string(id)) {}
};

// Escalation signal: removing the last peer is a skeleton-level event, the
// cluster itself never executes it.
struct LastPeerInCluster : Error {
  explicit LastPeerInCluster(std::uint64_t cluster)
      : Error("cluster " + std::to_string(cluster) + " would become empty") {}
};

struct UnknownCluster : Error {
  explicit UnknownCluster(std::uint64_t id)
      : Error("unknown cluster " + std::to_string(id)) {}
};

struct UnreachableAfterRepair : Error {
  using Error::Error;
};

struct LevelExhausted : Error {
  using Error::Error;
};

struct InvalidConfig : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line(line) {}
  std::size_t line;
};

struct ValidationError : Error {
  ValidationError(const std::string& key, const std::string& reason)
      : Error("key '" + key + "': " + reason), key(key) {}
  std::string key;
};

struct SchemaMismatch : Error {
  using Error::Error;
};

}  // namespace art
