#include "semcache/trace_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include <fmt/format.h>

#include "semcache/vector_core.hpp"

namespace semcache {

static_assert(std::endian::native == std::endian::little,
              "trace IO assumes a little-endian host");

std::string_view to_string(TraceErrorKind kind) noexcept {
  switch (kind) {
    case TraceErrorKind::Io: return "io";
    case TraceErrorKind::BadMagic: return "bad-magic";
    case TraceErrorKind::BadVersion: return "bad-version";
    case TraceErrorKind::BadHeader: return "bad-header";
    case TraceErrorKind::Truncated: return "truncated";
    case TraceErrorKind::TrailingData: return "trailing-data";
    case TraceErrorKind::NonFinite: return "non-finite";
    case TraceErrorKind::NotNormalized: return "not-normalized";
    case TraceErrorKind::InconsistentDim: return "inconsistent-dim";
  }
  return "unknown";
}

TraceError::TraceError(TraceErrorKind kind, const std::string& what)
    : DataError(fmt::format("trace {}: {}", to_string(kind), what)), kind_(kind) {}

namespace {

template <typename T>
void put(std::vector<char>& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T get(const char* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  return value;
}

void check_entry(const Trace& trace, const TraceEntry& e, std::size_t i) {
  if (e.vector.size() != trace.dim) {
    throw TraceError(TraceErrorKind::InconsistentDim,
                     fmt::format("record {} has dim {}, expected {}", i, e.vector.size(), trace.dim));
  }
  if (!all_finite(e.vector)) {
    throw TraceError(TraceErrorKind::NonFinite, fmt::format("record {} vector", i));
  }
  if (trace.normalized && !is_unit(e.vector)) {
    throw TraceError(TraceErrorKind::NotNormalized,
                     fmt::format("record {} has norm {}", i, l2_norm(e.vector)));
  }
  if (trace.has_surprisal) {
    if (!e.surprisal) {
      throw TraceError(TraceErrorKind::BadHeader, fmt::format("record {} lacks surprisal", i));
    }
    if (!std::isfinite(*e.surprisal)) {
      throw TraceError(TraceErrorKind::NonFinite, fmt::format("record {} surprisal", i));
    }
  }
}

}  // namespace

void write_trace(const std::filesystem::path& path, const Trace& trace) {
  if (trace.dim == 0 || trace.dim > UINT32_MAX) {
    throw TraceError(TraceErrorKind::BadHeader, fmt::format("unsupported dim {}", trace.dim));
  }
  for (std::size_t i = 0; i < trace.size(); ++i) check_entry(trace, trace.entries[i], i);

  const std::size_t record = trace.dim + (trace.has_surprisal ? 1 : 0);
  std::vector<char> buf;
  buf.reserve(kTraceHeaderBytes + trace.size() * record * sizeof(float));
  buf.insert(buf.end(), std::begin(kTraceMagic), std::end(kTraceMagic));
  put<std::uint8_t>(buf, kTraceVersion);
  std::uint8_t flags = 0;
  if (trace.normalized) flags |= kFlagNormalized;
  if (trace.has_surprisal) flags |= kFlagSurprisal;
  put<std::uint8_t>(buf, flags);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(trace.dim));
  put<std::uint64_t>(buf, static_cast<std::uint64_t>(trace.size()));
  for (const auto& e : trace.entries) {
    for (float x : e.vector) put<float>(buf, x);
    if (trace.has_surprisal) put<float>(buf, *e.surprisal);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TraceError(TraceErrorKind::Io, "cannot open " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw TraceError(TraceErrorKind::Io, "write failed for " + path.string());
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceError(TraceErrorKind::Io, "cannot open " + path.string());
  const std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < sizeof(kTraceMagic) ||
      std::memcmp(buf.data(), kTraceMagic, sizeof(kTraceMagic)) != 0) {
    throw TraceError(TraceErrorKind::BadMagic, path.string());
  }
  if (buf.size() < kTraceHeaderBytes) {
    throw TraceError(TraceErrorKind::Truncated, "header is incomplete");
  }
  const auto version = get<std::uint8_t>(buf.data() + 8);
  if (version != kTraceVersion) {
    throw TraceError(TraceErrorKind::BadVersion, fmt::format("version {}", version));
  }
  const auto flags = get<std::uint8_t>(buf.data() + 9);
  if ((flags & ~(kFlagNormalized | kFlagSurprisal)) != 0) {
    throw TraceError(TraceErrorKind::BadHeader, fmt::format("unknown flags {:#04x}", flags));
  }
  const auto dim = get<std::uint32_t>(buf.data() + 10);
  const auto count = get<std::uint64_t>(buf.data() + 14);
  if (dim == 0) throw TraceError(TraceErrorKind::BadHeader, "dim is zero");

  Trace trace;
  trace.dim = dim;
  trace.normalized = (flags & kFlagNormalized) != 0;
  trace.has_surprisal = (flags & kFlagSurprisal) != 0;

  const std::size_t record_floats = dim + (trace.has_surprisal ? 1 : 0);
  const std::size_t record_bytes = record_floats * sizeof(float);
  const std::size_t payload = buf.size() - kTraceHeaderBytes;
  if (count > payload / record_bytes) {
    throw TraceError(TraceErrorKind::Truncated,
                     fmt::format("header promises {} records, payload holds {}", count,
                                 payload / record_bytes));
  }
  if (payload != count * record_bytes) {
    throw TraceError(TraceErrorKind::TrailingData,
                     fmt::format("{} bytes after the last record", payload - count * record_bytes));
  }

  trace.entries.resize(count);
  const char* p = buf.data() + kTraceHeaderBytes;
  for (std::size_t i = 0; i < count; ++i) {
    auto& e = trace.entries[i];
    e.index = i;
    e.vector.resize(dim);
    std::memcpy(e.vector.data(), p, dim * sizeof(float));
    p += dim * sizeof(float);
    if (trace.has_surprisal) {
      e.surprisal = get<float>(p);
      p += sizeof(float);
    }
    check_entry(trace, e, i);
  }
  return trace;
}

std::filesystem::path meta_path(const std::filesystem::path& trace_path) {
  auto p = trace_path;
  p.replace_extension();
  p += ".meta.json";
  return p;
}

void write_meta(const std::filesystem::path& trace_path, const TraceMeta& meta) {
  const nlohmann::json doc = {
      {"source", meta.source},
      {"embedding_model", meta.embedding_model},
      {"parameters", meta.parameters},
  };
  const auto path = meta_path(trace_path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw TraceError(TraceErrorKind::Io, "cannot open " + path.string());
  out << doc.dump(2) << '\n';
}

TraceMeta read_meta(const std::filesystem::path& trace_path) {
  const auto path = meta_path(trace_path);
  std::ifstream in(path);
  if (!in) throw TraceError(TraceErrorKind::Io, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
    TraceMeta meta;
    meta.source = doc.at("source").get<std::string>();
    meta.embedding_model = doc.at("embedding_model").get<std::string>();
    meta.parameters = doc.value("parameters", nlohmann::json::object());
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("sidecar {}: {}", path.string(), e.what()));
  }
}

}  // namespace semcache
