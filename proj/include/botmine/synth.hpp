#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "botmine/image.hpp"
#include "botmine/manifest.hpp"

namespace botmine {

// Desk-scale synthetic corpus. Every image shares one base pattern (radial
// shading, border frame, and `base_marks` structural glyphs at common
// positions); each class adds three class-specific glyphs at class-specific
// positions. Distractor marks reuse glyphs from the shared vocabulary at
// random positions, so local appearance alone cannot separate a true mark
// from its twins -- only the relative geometry can.
struct SynthSpec {
  int classes = 4;
  int train_per_class = 20;
  int test_per_class = 20;
  int canvas = 256;
  int glyph_size = 24;
  int base_marks = 6;
  int distractors = 6;
  double pos_jitter = 2.5;      // stddev of mark center jitter, px
  double rot_jitter_deg = 6.0;  // max glyph rotation jitter
  double noise_sigma = 0.02;    // additive intensity noise
  double min_separation = 30.0; // min distance between mark centers, px
  std::uint64_t seed = 1;
};

struct SynthCorpus {
  std::string train_manifest;  // paths to the written JSONL files
  std::string test_manifest;
  std::vector<ManifestEntry> train;
  std::vector<ManifestEntry> test;
  std::vector<std::string> class_names;
};

// Renders one image of the corpus without touching the filesystem.
// `index` enumerates (split, sample, class) in the generator's order.
struct SynthImage {
  GrayImage image;
  ManifestEntry entry;  // path left empty
};
SynthImage render_synth_image(const SynthSpec& spec, int class_id, int sample_id, bool test_split);

// Writes PNGs under <out_dir>/images plus train.jsonl / test.jsonl.
// Fully deterministic for a fixed spec.
SynthCorpus generate_synth_corpus(const SynthSpec& spec, const std::string& out_dir);

}  // namespace botmine
