#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "eitcool/types.hpp"

namespace eitcool {

/// Internal levels of the full three-level model.
enum class Level : int { g = 0, r = 1, e = 2 };

/// Internal levels of the effective dark-state model.
enum class DressedLevel : int { d = 0, plus = 1 };

inline constexpr int kDefaultSizeCap = 10000;

/// One atom's basis label: internal level index and phonon number.
struct SiteState {
  int level = 0;
  int phonon = 0;

  friend bool operator==(const SiteState&, const SiteState&) = default;
};

/**
 * Truncated composite space (internal level (x) Fock register) per atom.
 *
 * Basis ordering is site-major with site 1 most significant. Inside one site
 * the internal level is the major index:
 *
 *     site_index   = level * (n_max + 1) + phonon
 *     global_index = sum_j site_index_j * site_dim^(n_atoms - j)
 *
 * Every operator builder in the library goes through these maps.
 */
class HilbertSpace {
 public:
  HilbertSpace(int n_atoms, int internal_dim, int n_max, int size_cap = kDefaultSizeCap)
      : n_atoms_(n_atoms), internal_dim_(internal_dim), n_max_(n_max) {
    if (n_atoms < 1) throw DomainError("n_atoms must be >= 1");
    if (internal_dim != 2 && internal_dim != 3) throw DomainError("internal_dim must be 2 or 3");
    if (n_max < 1) throw DomainError("n_max must be >= 1");
    long long total = 1;
    const long long site = static_cast<long long>(internal_dim) * (n_max + 1);
    for (int j = 0; j < n_atoms; ++j) {
      total *= site;
      if (total > size_cap) {
        throw SizeError("Hilbert space dimension exceeds cap of " + std::to_string(size_cap));
      }
    }
    total_dim_ = static_cast<int>(total);
  }

  int n_atoms() const noexcept { return n_atoms_; }
  int internal_dim() const noexcept { return internal_dim_; }
  int n_max() const noexcept { return n_max_; }
  int phonon_dim() const noexcept { return n_max_ + 1; }
  int site_dim() const noexcept { return internal_dim_ * (n_max_ + 1); }
  int total_dim() const noexcept { return total_dim_; }

  int site_index(SiteState s) const {
    if (s.level < 0 || s.level >= internal_dim_ || s.phonon < 0 || s.phonon > n_max_) {
      throw DomainError("site state out of range");
    }
    return s.level * phonon_dim() + s.phonon;
  }

  SiteState site_state(int site_index) const {
    if (site_index < 0 || site_index >= site_dim()) throw DomainError("site index out of range");
    return {site_index / phonon_dim(), site_index % phonon_dim()};
  }

  /// Global index of a product basis state; states[0] is site 1.
  int index(const std::vector<SiteState>& states) const {
    if (static_cast<int>(states.size()) != n_atoms_) {
      throw DimensionError("basis label must name one state per atom");
    }
    int idx = 0;
    for (const auto& s : states) idx = idx * site_dim() + site_index(s);
    return idx;
  }

  std::vector<SiteState> decode(int index) const {
    if (index < 0 || index >= total_dim_) throw DomainError("basis index out of range");
    std::vector<SiteState> out(n_atoms_);
    for (int j = n_atoms_ - 1; j >= 0; --j) {
      out[j] = site_state(index % site_dim());
      index /= site_dim();
    }
    return out;
  }

  friend bool operator==(const HilbertSpace&, const HilbertSpace&) = default;

 private:
  int n_atoms_;
  int internal_dim_;
  int n_max_;
  int total_dim_ = 0;
};

inline HilbertSpace build_space(int n_atoms, int internal_dim, int n_max,
                                int size_cap = kDefaultSizeCap) {
  return HilbertSpace(n_atoms, internal_dim, n_max, size_cap);
}

}  // namespace eitcool
