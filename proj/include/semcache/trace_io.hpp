#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "semcache/errors.hpp"
#include "semcache/trace.hpp"

namespace semcache {

inline constexpr char kTraceMagic[8] = {'S', 'E', 'M', 'T', 'R', 'A', 'C', 'E'};
inline constexpr std::uint8_t kTraceVersion = 1;
inline constexpr std::uint8_t kFlagNormalized = 0x01;
inline constexpr std::uint8_t kFlagSurprisal = 0x02;
inline constexpr std::size_t kTraceHeaderBytes = 8 + 1 + 1 + 4 + 8;

enum class TraceErrorKind {
  Io,
  BadMagic,
  BadVersion,
  BadHeader,     // unknown flag bits or zero dim
  Truncated,     // payload shorter than the header promises
  TrailingData,  // payload longer than the header promises
  NonFinite,     // NaN or infinity in a vector or surprisal
  NotNormalized,
  InconsistentDim,
};

std::string_view to_string(TraceErrorKind kind) noexcept;

class TraceError : public DataError {
 public:
  TraceError(TraceErrorKind kind, const std::string& what);
  TraceErrorKind kind() const noexcept { return kind_; }

 private:
  TraceErrorKind kind_;
};

/// Writes the little-endian trace layout. Flags come from trace.normalized and
/// trace.has_surprisal and are checked against the entries before anything is
/// written.
void write_trace(const std::filesystem::path& path, const Trace& trace);

/// Reads and fully validates a trace. Entry indices are set to file order.
Trace read_trace(const std::filesystem::path& path);

/// Description stored next to a trace as <stem>.meta.json.
struct TraceMeta {
  std::string source;
  std::string embedding_model;
  nlohmann::json parameters = nlohmann::json::object();
};

std::filesystem::path meta_path(const std::filesystem::path& trace_path);
void write_meta(const std::filesystem::path& trace_path, const TraceMeta& meta);
/// Throws TraceError(Io) when the sidecar is missing and DataError when it
/// is not a JSON object with the expected fields.
TraceMeta read_meta(const std::filesystem::path& trace_path);

}  // namespace semcache
