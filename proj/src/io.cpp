#include "sonolab/io.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <utility>

#include <openssl/evp.h>

#include "sonolab/errors.hpp"

namespace sonolab::io {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header.size())
    throw IoError("CSV row width does not match the header");
  rows.push_back(std::move(cells));
}

std::string CsvTable::render() const {
  std::string out;
  auto append_row = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i != 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  append_row(header);
  for (const auto& row : rows) append_row(row);
  return out;
}

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string out((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for checksum");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw IoError("cannot allocate digest context");
  if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("cannot initialize SHA-256");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    const std::streamsize got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(got));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);

  static const char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json RunManifest::to_json(const std::string& created_utc) const {
  nlohmann::json j;
  j["tool"] = "sonolab";
#ifdef SONOLAB_VERSION
  j["version"] = SONOLAB_VERSION;
#else
  j["version"] = "unknown";
#endif
  j["command"] = command;
  j["seed"] = seed;
  j["created_utc"] = created_utc;
  j["parameters"] = parameters;
  j["annotations"] = annotations;
  j["outputs"] = nlohmann::json::array();
  for (const ManifestEntry& e : outputs)
    j["outputs"].push_back({{"file", e.file}, {"sha256", e.sha256}});
  return j;
}

void write_manifest(const std::filesystem::path& dir, RunManifest manifest) {
  for (ManifestEntry& e : manifest.outputs)
    e.sha256 = sha256_file(dir / e.file);
  const nlohmann::json j = manifest.to_json(iso8601_utc_now());
  write_text_atomic(dir / "manifest.json", j.dump(2) + "\n");

  // Post-write audit: every listed output must still hash to what the
  // manifest records.
  const nlohmann::json back =
      nlohmann::json::parse(read_text(dir / "manifest.json"));
  for (const auto& entry : back.at("outputs")) {
    const std::string file = entry.at("file").get<std::string>();
    const std::string recorded = entry.at("sha256").get<std::string>();
    if (sha256_file(dir / file) != recorded)
      throw IoError("checksum mismatch for " + file +
                    " after writing the manifest");
  }
}

}  // namespace sonolab::io
