#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "dspe/io.hpp"
#include "dspe/reference_store.hpp"
#include "dspe/report.hpp"

namespace dspe {

using nlohmann::json;

namespace {

constexpr const char* kIndexFile = "index.json";

std::string pulse_label(std::int64_t ps) {
  if (ps % 1000 == 0) return std::to_string(ps / 1000) + "ns";
  return std::to_string(ps) + "ps";
}

std::string safe_name(const std::string& id) {
  std::string out;
  for (char c : id)
    out += (std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '_') ? c : '_';
  return out.empty() ? "net" : out;
}

std::string trace_bytes(const Trace& t) {
  std::ostringstream ss;
  write_trace_csv(ss, t);
  return ss.str();
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 digest failed");
  std::ostringstream ss;
  ss << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) ss << std::setw(2) << static_cast<int>(md[i]);
  return ss.str();
}

ReferenceKey ReferenceKey::of(const Trace& trace) {
  return ReferenceKey{trace.meta.topology_id, trace.meta.wavelength_nm,
                      static_cast<std::int64_t>(std::llround(trace.meta.pulse_width_s * 1e12))};
}

std::string ReferenceKey::str() const {
  return network_id + "/" + std::to_string(wavelength_nm) + "nm/" + pulse_label(pulse_width_ps);
}

ReferenceStore::ReferenceStore(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw IoError("cannot create store " + root_.string() + ": " + ec.message());
  load_index();
}

std::filesystem::path ReferenceStore::default_root() {
  if (const char* env = std::getenv("DSPE_STORE"); env != nullptr && *env != '\0') return env;
  return std::filesystem::current_path() / "dspe-store";
}

StoreEntry ReferenceStore::add(const Trace& trace, bool replace) {
  const auto key = ReferenceKey::of(trace);
  if (key.network_id.empty()) throw IoError("reference trace has no topology_id");
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const StoreEntry& e) { return e.key == key; });
  if (it != entries_.end() && !replace)
    throw IoError("reference " + key.str() + " already stored");
  const auto bytes = trace_bytes(trace);
  StoreEntry entry{key,
                   safe_name(key.network_id) + "_" + std::to_string(key.wavelength_nm) + "nm_" +
                       pulse_label(key.pulse_width_ps) + ".csv",
                   sha256_hex(bytes)};
  save_text(root_ / entry.file, bytes);
  if (it != entries_.end()) {
    *it = entry;
  } else {
    entries_.push_back(entry);
  }
  save_index();
  return entry;
}

std::optional<Trace> ReferenceStore::find(const ReferenceKey& key) const {
  const auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const StoreEntry& e) { return e.key == key; });
  if (it == entries_.end()) return std::nullopt;
  const auto path = root_ / it->file;
  const auto bytes = load_text(path);
  if (sha256_hex(bytes) != it->sha256) throw IoError("checksum mismatch for " + path.string());
  std::istringstream in(bytes);
  return read_trace_csv(in, path.string());
}

Trace ReferenceStore::get(const ReferenceKey& key) const {
  auto t = find(key);
  if (!t) throw IoError("no reference stored for " + key.str());
  return std::move(*t);
}

std::vector<StoreEntry> ReferenceStore::list() const { return entries_; }

void ReferenceStore::load_index() {
  entries_.clear();
  const auto path = root_ / kIndexFile;
  if (!std::filesystem::exists(path)) return;
  try {
    const auto j = json::parse(load_text(path));
    for (const auto& e : j.at("entries")) {
      entries_.push_back(StoreEntry{ReferenceKey{e.at("network_id").get<std::string>(),
                                                 e.at("wavelength_nm").get<int>(),
                                                 e.at("pulse_width_ps").get<std::int64_t>()},
                                    e.at("file").get<std::string>(),
                                    e.at("sha256").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

void ReferenceStore::save_index() const {
  json entries = json::array();
  for (const auto& e : entries_)
    entries.push_back(json{{"network_id", e.key.network_id},
                           {"wavelength_nm", e.key.wavelength_nm},
                           {"pulse_width_ps", e.key.pulse_width_ps},
                           {"file", e.file},
                           {"sha256", e.sha256}});
  save_text(root_ / kIndexFile, json{{"entries", entries}}.dump(2) + "\n");
}

}  // namespace dspe
