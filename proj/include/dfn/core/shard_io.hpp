#pragma once

// Binary shard format and JSON-lines manifest.
//
// Shard layout, all little-endian:
//   "DFNS" | version u32 (=1) | record_count u32 | d_img u32 | d_txt u32
//   then per record:
//   id u64 | image f32 x d_img | text f32 x d_txt | concept_label u32 | aligned u8
//
// Manifest: one JSON object per line, in shard order:
//   {"path":"shard-00000.dfns","record_count":3,"sha256":"..."}
// Paths are relative to the manifest's directory.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dfn/core/pool.hpp"

namespace dfn {

inline constexpr char kShardMagic[4] = {'D', 'F', 'N', 'S'};
inline constexpr std::uint32_t kShardVersion = 1;
inline constexpr std::size_t kShardHeaderBytes = 20;
inline constexpr const char* kManifestName = "manifest.jsonl";

struct ShardHeader {
  std::uint32_t version = kShardVersion;
  std::uint32_t record_count = 0;
  Dims dims{};
};

struct ShardRef {
  std::string path;  // relative to ShardSet::root
  std::uint32_t record_count = 0;
  std::string sha256;
  friend bool operator==(const ShardRef&, const ShardRef&) = default;
};

struct ShardSet {
  std::filesystem::path root;
  std::vector<ShardRef> shards;
  std::uint64_t total_records = 0;
  Dims dims{};

  std::filesystem::path shard_path(std::size_t i) const { return root / shards[i].path; }
};

std::size_t record_bytes(Dims dims) noexcept;

std::vector<std::uint8_t> encode_shard(const Pool& pool);
// `name` is used in error messages only.
Pool decode_shard(std::span<const std::uint8_t> bytes, const std::string& name);
ShardHeader decode_header(std::span<const std::uint8_t> bytes, const std::string& name);

// Writes one shard file; returns its hex SHA-256.
std::string write_shard(const Pool& pool, const std::filesystem::path& path);
Pool read_shard(const std::filesystem::path& path);
// Reads a shard and checks its dims against `expected`.
Pool read_shard(const std::filesystem::path& path, Dims expected);

// Splits `pool` into consecutive shards of at most records_per_shard records
// (never splitting a record), writes them plus manifest.jsonl into `dir`.
// An empty pool produces a manifest with a single empty shard so the dims
// are still recorded.
ShardSet write_shards(const Pool& pool, const std::filesystem::path& dir,
                      std::size_t records_per_shard);

// Builds a ShardSet from explicit shard files by reading their headers.
// Throws ShardError on any header problem and on dims disagreeing across
// shards.
ShardSet open_shards(std::span<const std::filesystem::path> paths);

void write_manifest(const ShardSet& set);
// Accepts either a directory containing manifest.jsonl or the manifest path.
ShardSet read_manifest(const std::filesystem::path& dir_or_manifest);

// Concatenates all shards in order. With verify_checksums, recomputes each
// shard's SHA-256 against the manifest entry.
Pool load_pool(const ShardSet& set, bool verify_checksums = false);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace dfn
