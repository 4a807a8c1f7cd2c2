#include "sfdm/kspace.hpp"

namespace sfdm {

std::vector<cdouble> embed_conjugate_symmetric(const std::vector<cdouble>& reduced,
                                               const ModeSelector& s) {
  check_arg(reduced.size() == s.indices.size(),
            "embed_conjugate_symmetric: reduced size mismatch");
  std::vector<cdouble> out(s.spectrum_shape.size(), cdouble(0));
  // Selector indices are sorted, so membership is a binary search.
  auto selected = [&](int idx) {
    return std::binary_search(s.indices.begin(), s.indices.end(), idx);
  };
  for (size_t i = 0; i < s.indices.size(); ++i) {
    int idx = s.indices[i];
    int mir = mirror_index(idx, s.spectrum_shape);
    if (mir == idx) {
      out[idx] = cdouble(reduced[i].real(), 0.0);
    } else {
      out[idx] = reduced[i];
      if (!selected(mir)) out[mir] = std::conj(reduced[i]);
    }
  }
  return out;
}

Spectrum truncate_then_embed(const Spectrum& X, const ModeSelector& s) {
  validate_spectrum(X, "truncate_then_embed");
  check_arg(X.channels == 1, "truncate_then_embed: single-channel spectra only");
  check_arg(X.shape == s.spectrum_shape, "truncate_then_embed: shape mismatch");
  Spectrum out;
  out.kind = X.kind;
  out.shape = X.shape;
  if (X.kind == TransformKind::Dct2) {
    out.dct = embed_modes(truncate_modes(X.dct, s), s);
  } else {
    out.dft = embed_conjugate_symmetric(truncate_modes(X.dft, s), s);
  }
  return out;
}

}  // namespace sfdm
