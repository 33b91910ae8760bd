// ============================================================================
// reference_store.hpp -- on-disk reference traces keyed by network,
// wavelength and pulse width
//
// A store is a directory of trace CSV files plus index.json mapping each key
// to its file and SHA-256 checksum. Checksums are verified on every load.
// ============================================================================
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dspe/model.hpp"

namespace dspe {

struct ReferenceKey {
  std::string network_id;
  int wavelength_nm = 1550;
  std::int64_t pulse_width_ps = 100'000;

  [[nodiscard]] static ReferenceKey of(const Trace& trace);
  [[nodiscard]] std::string str() const;
  friend bool operator==(const ReferenceKey&, const ReferenceKey&) = default;
};

struct StoreEntry {
  ReferenceKey key;
  std::string file;
  std::string sha256;
};

class ReferenceStore {
 public:
  /// Opens (creating if needed) the store rooted at `root`.
  explicit ReferenceStore(std::filesystem::path root);

  /// Environment variable DSPE_STORE, else ./dspe-store.
  [[nodiscard]] static std::filesystem::path default_root();

  /// Adds a trace under its own key. Throws IoError when the key exists and
  /// `replace` is false.
  StoreEntry add(const Trace& trace, bool replace = false);

  [[nodiscard]] std::optional<Trace> find(const ReferenceKey& key) const;
  /// Throws IoError when the key is absent or the checksum does not match.
  [[nodiscard]] Trace get(const ReferenceKey& key) const;
  [[nodiscard]] std::vector<StoreEntry> list() const;
  [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }

 private:
  void load_index();
  void save_index() const;

  std::filesystem::path root_;
  std::vector<StoreEntry> entries_;
};

[[nodiscard]] std::string sha256_hex(const std::string& bytes);

}  // namespace dspe
