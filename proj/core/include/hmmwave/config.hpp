#ifndef HMMWAVE_CONFIG_HPP
#define HMMWAVE_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hmmwave/types.hpp"

namespace hmmwave {

// Flat key-value configuration: `key = value` lines, '#' comments, keys
// namespaced by dots (macro.H, micro.eta_over_eps, kernel.space, ...).
class KeyValueConfig {
  public:
    static KeyValueConfig from_file(const std::string& path);
    static KeyValueConfig from_string(const std::string& text);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::int64_t get_int64(const std::string& key, std::int64_t fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;

    // Sorted `key = value` lines; the config hash recorded in summaries is
    // the FNV-1a of this dump.
    std::string canonical_dump() const;
    std::uint64_t hash() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

}  // namespace hmmwave

#endif
