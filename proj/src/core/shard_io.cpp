#include "dfn/core/shard_io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <memory>

#include "dfn/core/error.hpp"

namespace dfn {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void put_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
void put_u64(std::uint8_t* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{p[i]} << (8 * i);
  return v;
}
std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return v;
}

std::uint8_t* put_floats(std::uint8_t* p, std::span<const float> xs) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(p, xs.data(), xs.size_bytes());
    return p + xs.size_bytes();
  } else {
    for (float x : xs) {
      put_u32(p, std::bit_cast<std::uint32_t>(x));
      p += 4;
    }
    return p;
  }
}

const std::uint8_t* get_floats(const std::uint8_t* p, std::span<float> out) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), p, out.size_bytes());
    return p + out.size_bytes();
  } else {
    for (float& x : out) {
      x = std::bit_cast<float>(get_u32(p));
      p += 4;
    }
    return p;
  }
}

std::string shard_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "shard-%05zu.dfns", i);
  return buf;
}

}  // namespace

std::size_t record_bytes(Dims dims) noexcept {
  return 8 + 4 * std::size_t{dims.image} + 4 * std::size_t{dims.text} + 4 + 1;
}

std::vector<std::uint8_t> encode_shard(const Pool& pool) {
  const Dims dims = pool.dims();
  std::vector<std::uint8_t> out(kShardHeaderBytes + pool.size() * record_bytes(dims));
  std::uint8_t* p = out.data();
  std::memcpy(p, kShardMagic, 4);
  put_u32(p + 4, kShardVersion);
  put_u32(p + 8, static_cast<std::uint32_t>(pool.size()));
  put_u32(p + 12, dims.image);
  put_u32(p + 16, dims.text);
  p += kShardHeaderBytes;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const RecordView r = pool[i];
    put_u64(p, r.id);
    p = put_floats(p + 8, r.image);
    p = put_floats(p, r.text);
    put_u32(p, r.concept_label);
    p[4] = static_cast<std::uint8_t>(r.aligned);
    p += 5;
  }
  return out;
}

ShardHeader decode_header(std::span<const std::uint8_t> bytes, const std::string& name) {
  if (bytes.size() < kShardHeaderBytes) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kShardMagic, 4) != 0) {
      throw ShardError(ShardError::Kind::kBadMagic, name, "");
    }
    throw ShardError(ShardError::Kind::kTruncated, name, "header needs 20 bytes, file has " +
                                                             std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), kShardMagic, 4) != 0) {
    throw ShardError(ShardError::Kind::kBadMagic, name, "");
  }
  ShardHeader h;
  h.version = get_u32(bytes.data() + 4);
  if (h.version != kShardVersion) {
    throw ShardError(ShardError::Kind::kVersionMismatch, name,
                     "expected " + std::to_string(kShardVersion) + ", found " + std::to_string(h.version));
  }
  h.record_count = get_u32(bytes.data() + 8);
  h.dims = {get_u32(bytes.data() + 12), get_u32(bytes.data() + 16)};
  return h;
}

Pool decode_shard(std::span<const std::uint8_t> bytes, const std::string& name) {
  const ShardHeader h = decode_header(bytes, name);
  const std::size_t rb = record_bytes(h.dims);
  const std::size_t expected = kShardHeaderBytes + std::size_t{h.record_count} * rb;
  if (bytes.size() < expected) {
    throw ShardError(ShardError::Kind::kTruncated, name,
                     "expected " + std::to_string(expected) + " bytes, found " + std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw ShardError(ShardError::Kind::kTruncated, name,
                     "record_count " + std::to_string(h.record_count) + " does not match " +
                         std::to_string(bytes.size()) + " bytes");
  }
  Pool pool(h.dims);
  pool.reserve(h.record_count);
  Record rec;
  rec.image.resize(h.dims.image);
  rec.text.resize(h.dims.text);
  const std::uint8_t* p = bytes.data() + kShardHeaderBytes;
  for (std::uint32_t i = 0; i < h.record_count; ++i) {
    rec.id = get_u64(p);
    p = get_floats(p + 8, rec.image);
    p = get_floats(p, rec.text);
    rec.concept_label = get_u32(p);
    rec.aligned = static_cast<Alignment>(p[4]);
    p += 5;
    pool.push_back(rec);
  }
  return pool;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw ShardError(ShardError::Kind::kIo, path.string(), "cannot open");
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<std::uint8_t> bytes(size);
  in.seekg(0);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw ShardError(ShardError::Kind::kIo, path.string(), "read failed");
  }
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ShardError(ShardError::Kind::kIo, path.string(), "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ShardError(ShardError::Kind::kIo, path.string(), "write failed");
}

std::string write_shard(const Pool& pool, const std::filesystem::path& path) {
  const auto bytes = encode_shard(pool);
  write_file_bytes(path, bytes);
  return sha256_hex(bytes);
}

Pool read_shard(const std::filesystem::path& path) {
  return decode_shard(read_file_bytes(path), path.string());
}

Pool read_shard(const std::filesystem::path& path, Dims expected) {
  const auto bytes = read_file_bytes(path);
  const ShardHeader h = decode_header(bytes, path.string());
  if (h.dims != expected) {
    throw ShardError(ShardError::Kind::kDimensionMismatch, path.string(),
                     "shard has (" + std::to_string(h.dims.image) + ", " + std::to_string(h.dims.text) +
                         "), expected (" + std::to_string(expected.image) + ", " +
                         std::to_string(expected.text) + ")");
  }
  return decode_shard(bytes, path.string());
}

ShardSet write_shards(const Pool& pool, const std::filesystem::path& dir,
                      std::size_t records_per_shard) {
  if (records_per_shard == 0) throw ValidationError("records_per_shard must be >= 1");
  std::filesystem::create_directories(dir);
  ShardSet set;
  set.root = dir;
  set.dims = pool.dims();
  set.total_records = pool.size();
  const std::size_t n = pool.size();
  std::size_t index = 0;
  std::size_t begin = 0;
  do {
    const std::size_t end = std::min(n, begin + records_per_shard);
    const Pool part = pool.slice(begin, end);
    ShardRef ref{shard_name(index), static_cast<std::uint32_t>(part.size()), ""};
    ref.sha256 = write_shard(part, dir / ref.path);
    set.shards.push_back(std::move(ref));
    ++index;
    begin = end;
  } while (begin < n);
  write_manifest(set);
  return set;
}

ShardSet open_shards(std::span<const std::filesystem::path> paths) {
  ShardSet set;
  bool first = true;
  for (const auto& path : paths) {
    const auto bytes = read_file_bytes(path);
    const ShardHeader h = decode_header(bytes, path.string());
    if (first) {
      set.dims = h.dims;
      set.root = path.parent_path();
      first = false;
    } else if (h.dims != set.dims) {
      throw ShardError(ShardError::Kind::kDimensionMismatch, path.string(),
                       "dims differ from first shard");
    }
    const std::size_t expected = kShardHeaderBytes + std::size_t{h.record_count} * record_bytes(h.dims);
    if (bytes.size() != expected) {
      throw ShardError(ShardError::Kind::kTruncated, path.string(),
                       "expected " + std::to_string(expected) + " bytes, found " + std::to_string(bytes.size()));
    }
    std::error_code ec;
    auto rel = std::filesystem::relative(path, set.root, ec);
    set.shards.push_back({ec ? path.string() : rel.generic_string(), h.record_count, sha256_hex(bytes)});
    set.total_records += h.record_count;
  }
  return set;
}

void write_manifest(const ShardSet& set) {
  std::ofstream out(set.root / kManifestName, std::ios::trunc);
  if (!out) throw ShardError(ShardError::Kind::kIo, (set.root / kManifestName).string(), "cannot write manifest");
  for (const auto& s : set.shards) {
    nlohmann::ordered_json line;
    line["path"] = s.path;
    line["record_count"] = s.record_count;
    line["sha256"] = s.sha256;
    out << line.dump() << '\n';
  }
}

ShardSet read_manifest(const std::filesystem::path& dir_or_manifest) {
  const bool is_dir = std::filesystem::is_directory(dir_or_manifest);
  const auto manifest = is_dir ? dir_or_manifest / kManifestName : dir_or_manifest;
  std::ifstream in(manifest);
  if (!in) throw ShardError(ShardError::Kind::kIo, manifest.string(), "cannot open manifest");
  ShardSet set;
  set.root = manifest.parent_path();
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    ShardRef ref{j.at("path").get<std::string>(), j.at("record_count").get<std::uint32_t>(),
                 j.at("sha256").get<std::string>()};
    const auto path = set.root / ref.path;
    std::ifstream shard(path, std::ios::binary);
    if (!shard) throw ShardError(ShardError::Kind::kIo, path.string(), "listed in manifest but missing");
    std::uint8_t header[kShardHeaderBytes];
    shard.read(reinterpret_cast<char*>(header), kShardHeaderBytes);
    const auto got = static_cast<std::size_t>(shard.gcount());
    const ShardHeader h = decode_header({header, got}, path.string());
    if (first) {
      set.dims = h.dims;
      first = false;
    } else if (h.dims != set.dims) {
      throw ShardError(ShardError::Kind::kDimensionMismatch, path.string(), "dims differ from first shard");
    }
    if (h.record_count != ref.record_count) {
      throw ShardError(ShardError::Kind::kTruncated, path.string(), "record_count disagrees with manifest");
    }
    set.total_records += ref.record_count;
    set.shards.push_back(std::move(ref));
  }
  return set;
}

Pool load_pool(const ShardSet& set, bool verify_checksums) {
  Pool pool(set.dims);
  pool.reserve(set.total_records);
  for (std::size_t i = 0; i < set.shards.size(); ++i) {
    const auto path = set.shard_path(i);
    const auto bytes = read_file_bytes(path);
    if (verify_checksums && sha256_hex(bytes) != set.shards[i].sha256) {
      throw ShardError(ShardError::Kind::kIo, path.string(), "sha256 does not match manifest");
    }
    const ShardHeader h = decode_header(bytes, path.string());
    if (h.dims != set.dims) {
      throw ShardError(ShardError::Kind::kDimensionMismatch, path.string(), "dims differ from shard set");
    }
    pool.append(decode_shard(bytes, path.string()));
  }
  return pool;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out(2 * len, '0');
  for (unsigned int i = 0; i < len; ++i) {
    out[2 * i] = hex[digest[i] >> 4];
    out[2 * i + 1] = hex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file_bytes(path)); }

}  // namespace dfn
