#pragma once
// Reduced k-space representation: mode selectors and the gather/scatter maps
// between full spectra and length-m coefficient blocks.
//
// A selector is a sorted list of distinct flat indices into the row-major
// coefficient grid. `truncate` gathers the selected coefficients in selector
// order; `embed` scatters them back into a zero spectrum (the adjoint map),
// so truncate(embed(v)) == v and embed(truncate(.)) is the orthogonal
// projection onto the selected modes.
//
// Dft wirings that must produce real fields use `embed_conjugate_symmetric`:
// each scattered coefficient is mirrored to its negated-frequency slot as a
// conjugate (unless that slot is itself selected), and self-mirrored slots
// (frequency 0 and Nyquist per axis) are projected to their real part. For
// selectors confined to per-axis frequencies <= axis/2 this makes the
// embedded spectrum conjugate symmetric by construction.

#include <algorithm>
#include <vector>

#include "sfdm/common.hpp"
#include "sfdm/transforms.hpp"

namespace sfdm {

struct ModeSelector {
  GridShape spectrum_shape;
  std::vector<int> indices;  // sorted ascending, distinct, in [0, size)

  int modes() const { return static_cast<int>(indices.size()); }
};

inline void validate_selector(const ModeSelector& s, const std::string& who) {
  check_arg(s.spectrum_shape.rows >= 1 && s.spectrum_shape.cols >= 1,
            who + ": empty spectrum shape");
  check_arg(!s.indices.empty(), who + ": selector needs at least one mode");
  int prev = -1;
  for (int idx : s.indices) {
    check_arg(idx > prev, who + ": selector indices must be sorted and distinct");
    check_arg(idx >= 0 && idx < s.spectrum_shape.size(),
              who + ": selector index out of range");
    prev = idx;
  }
}

// Flat index of the negated-frequency partner of `idx`.
inline int mirror_index(int idx, GridShape shape) {
  int r = idx / shape.cols;
  int c = idx % shape.cols;
  int mr = (shape.rows - r) % shape.rows;
  int mc = (shape.cols - c) % shape.cols;
  return mr * shape.cols + mc;
}

// True when every selected mode keeps per-axis frequency <= axis/2, the
// precondition for conjugate-symmetric embedding to cover all mirrors.
inline bool selector_nonnegative_frequencies(const ModeSelector& s) {
  for (int idx : s.indices) {
    int r = idx / s.spectrum_shape.cols;
    int c = idx % s.spectrum_shape.cols;
    if (2 * r > s.spectrum_shape.rows || 2 * c > s.spectrum_shape.cols) return false;
  }
  return true;
}

template <typename T>
std::vector<T> truncate_modes(const std::vector<T>& full, const ModeSelector& s) {
  check_arg(full.size() == static_cast<size_t>(s.spectrum_shape.size()),
            "truncate_modes: spectrum size mismatch");
  std::vector<T> out(s.indices.size());
  for (size_t i = 0; i < s.indices.size(); ++i) out[i] = full[s.indices[i]];
  return out;
}

template <typename T>
std::vector<T> embed_modes(const std::vector<T>& reduced, const ModeSelector& s) {
  check_arg(reduced.size() == s.indices.size(), "embed_modes: reduced size mismatch");
  std::vector<T> out(s.spectrum_shape.size(), T(0));
  for (size_t i = 0; i < s.indices.size(); ++i) out[s.indices[i]] = reduced[i];
  return out;
}

std::vector<cdouble> embed_conjugate_symmetric(const std::vector<cdouble>& reduced,
                                               const ModeSelector& s);

// Spectrum-level wrappers.
Spectrum truncate_then_embed(const Spectrum& X, const ModeSelector& s);

}  // namespace sfdm
