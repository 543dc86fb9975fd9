// Near-perfect-reconstruction subband filter bank.
//
// A single linear-phase lowpass prototype h is designed per band count; the
// M analysis filters are cosine modulations
//   h_k[n] = 2 h[n] cos((pi/M)(k + 1/2) n + phi_k),  phi_k = (-1)^k pi/4
// and each synthesis filter is the time-reversed analysis filter scaled
// by M.  Critical sampling: decimation factor equals the band count.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "mbc/error.hpp"

namespace mbc {

struct PrototypeFilter {
  std::vector<double> taps;  // length num_taps, symmetric (linear phase)
  int num_bands = 0;
  int num_taps = 0;
  double cutoff = 0.0;  // normalized cycles/sample, near 1/(4M)
};

struct PqmfBank {
  PrototypeFilter prototype;
  std::vector<std::vector<double>> analysis;   // M filters, num_taps each
  std::vector<std::vector<double>> synthesis;  // time-reversed analysis * M
  int decimation = 0;   // == num_bands
  int group_delay = 0;  // == num_taps - 1, analysis+synthesis round trip

  int num_bands() const { return static_cast<int>(analysis.size()); }
  int num_taps() const { return prototype.num_taps; }
};

struct SubbandSignal {
  std::vector<std::vector<double>> bands;  // equal lengths
  size_t source_length = 0;
};

// Kaiser-window lowpass with the cutoff tuned by golden-section search to
// minimize the analysis-synthesis impulse reconstruction error.  Fails with
// insufficient-taps when the achieved error cannot reach -40 dB or the
// product-filter condition (see product_filter_secondary_ratio) is not met.
PrototypeFilter design_prototype(int num_bands, int num_taps,
                                 double target_attenuation_db = 100.0);

PqmfBank build_bank(const PrototypeFilter& prototype);

// Per band: convolve with the analysis filter, keep every M-th sample.
// The input is zero-padded to a multiple of M; all bands share one length.
SubbandSignal analyze(const PqmfBank& bank, std::span<const double> signal);

// Upsample each band by M, convolve with the synthesis filter, sum.
// Output length = M * band_length + num_taps - 1; content is delayed by
// group_delay samples relative to the analyze() input.
std::vector<double> synthesize(const PqmfBank& bank, const SubbandSignal& subbands);

// Round-trip energy error of a unit impulse after delay compensation, in dB
// (10 log10 of residual energy; input energy is 1).
double impulse_roundtrip_error_db(const PqmfBank& bank);

// Ratio of the second-largest to largest tap magnitude of the product filter
// F = h * reverse(h) sampled every 2M taps through its center.  Near-perfect
// reconstruction requires this to stay below 1e-3.
double product_filter_secondary_ratio(const PrototypeFilter& prototype);

// Text dump: "M=<bands> L=<taps> fc=<cutoff>" header line, then one tap per
// line with 17 significant digits (round-trips doubles exactly).
void save_filter_text(const PrototypeFilter& prototype, const std::string& path);
PrototypeFilter load_filter_text(const std::string& path);

}  // namespace mbc
