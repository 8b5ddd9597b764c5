#include "botmine/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "botmine/image_io.hpp"
#include "botmine/rng.hpp"

namespace botmine {

namespace {

struct Mark {
  double x = 0.0;
  double y = 0.0;
  int glyph = 0;
  double rot = 0.0;
};

double dist2(double ax, double ay, double bx, double by) {
  return (ax - bx) * (ax - bx) + (ay - by) * (ay - by);
}

// Rejection-sample a point keeping min_separation from the placed marks.
// Relaxes the separation if the canvas gets crowded.
void place_separated(Rng& rng, double lo, double hi, double min_sep,
                     const std::vector<Mark>& placed, double* out_x, double* out_y) {
  double sep = min_sep;
  for (int attempt = 0;; ++attempt) {
    const double x = rng.uniform(lo, hi);
    const double y = rng.uniform(lo, hi);
    bool ok = true;
    for (const auto& m : placed) {
      if (dist2(x, y, m.x, m.y) < sep * sep) {
        ok = false;
        break;
      }
    }
    if (ok) {
      *out_x = x;
      *out_y = y;
      return;
    }
    if (attempt > 0 && attempt % 200 == 0) sep *= 0.9;
  }
}

// Class layouts and the shared base layout are derived from the corpus seed
// alone, so every image of a class agrees on where its marks belong.
struct CorpusLayout {
  std::vector<Mark> base;                  // shared structural marks
  std::vector<std::vector<Mark>> classes;  // three marks per class
  int vocabulary = 0;
};

CorpusLayout make_layout(const SynthSpec& spec) {
  CorpusLayout layout;
  layout.vocabulary = 3 * spec.classes + spec.base_marks;
  Rng rng = Rng::substream(spec.seed, 0xBA5E);

  const double margin = spec.glyph_size + 12.0;
  const double lo = margin, hi = spec.canvas - margin;

  std::vector<Mark> all;
  for (int b = 0; b < spec.base_marks; ++b) {
    Mark m;
    place_separated(rng, lo, hi, spec.min_separation, all, &m.x, &m.y);
    m.glyph = 3 * spec.classes + b;
    all.push_back(m);
    layout.base.push_back(m);
  }
  for (int c = 0; c < spec.classes; ++c) {
    std::vector<Mark> marks;
    for (int i = 0; i < 3; ++i) {
      Mark m;
      m.glyph = 3 * c + i;
      while (true) {
        place_separated(rng, lo, hi, spec.min_separation, all, &m.x, &m.y);
        if (i < 2) break;
        // Keep the class triangle well-conditioned (clearly non-collinear).
        const double z = (marks[1].x - marks[0].x) * (m.y - marks[0].y) -
                         (marks[1].y - marks[0].y) * (m.x - marks[0].x);
        if (std::abs(z) > 4.0 * spec.min_separation * spec.min_separation) break;
      }
      all.push_back(m);
      marks.push_back(m);
    }
    layout.classes.push_back(std::move(marks));
  }
  return layout;
}

void render_glyph(GrayImage& img, const Mark& mark, int glyph_size, int vocabulary) {
  const double radius = glyph_size / 2.0;
  const double angle = M_PI * mark.glyph / vocabulary + mark.rot;
  const int family = mark.glyph % 3;
  const double cos_a = std::cos(angle), sin_a = std::sin(angle);

  const int x0 = std::max(0, static_cast<int>(std::floor(mark.x - radius)));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(mark.x + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(mark.y - radius)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(mark.y + radius)));

  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - mark.x, dy = y - mark.y;
      const double rho = std::sqrt(dx * dx + dy * dy);
      const double alpha = std::clamp((radius - rho) / 2.0, 0.0, 1.0);
      if (alpha <= 0.0) continue;
      const double t = dx * cos_a + dy * sin_a;
      const double s = -dx * sin_a + dy * cos_a;
      double v = 0.0;
      switch (family) {
        case 0:  // grating
          v = 0.5 + 0.48 * std::cos(2.0 * M_PI * t / (glyph_size / 3.0));
          break;
        case 1:  // thick bar
          v = std::abs(t) < glyph_size / 6.0 ? 0.95 : 0.05;
          break;
        default:  // cross
          v = (std::abs(t) < glyph_size / 7.0 || std::abs(s) < glyph_size / 7.0) ? 0.9 : 0.1;
      }
      const float mixed = static_cast<float>((1.0 - alpha) * img.at(x, y) + alpha * v);
      img.at(x, y) = mixed;
    }
  }
}

GrayImage render_base(const SynthSpec& spec) {
  GrayImage img = GrayImage::zeros(spec.canvas, spec.canvas);
  const double cx = spec.canvas / 2.0, cy = spec.canvas / 2.0;
  const double rmax = std::sqrt(2.0) * spec.canvas / 2.0;
  for (int y = 0; y < spec.canvas; ++y) {
    for (int x = 0; x < spec.canvas; ++x) {
      const double r = std::sqrt(dist2(x, y, cx, cy)) / rmax;
      double v = 0.3 + 0.3 * r;
      const int edge = std::min(std::min(x, y), std::min(spec.canvas - 1 - x, spec.canvas - 1 - y));
      if (edge >= 6 && edge < 12) v = 0.15;  // border frame
      img.at(x, y) = static_cast<float>(v);
    }
  }
  return img;
}

}  // namespace

SynthImage render_synth_image(const SynthSpec& spec, int class_id, int sample_id,
                              bool test_split) {
  if (class_id < 0 || class_id >= spec.classes) throw ConfigError("synth: class out of range");
  const CorpusLayout layout = make_layout(spec);

  // Substream key encodes (split, class, sample) so images are independent
  // of generation order.
  const std::uint64_t key = (static_cast<std::uint64_t>(test_split) << 40) |
                            (static_cast<std::uint64_t>(class_id) << 20) |
                            static_cast<std::uint64_t>(sample_id);
  Rng rng = Rng::substream(spec.seed, key);

  GrayImage img = render_base(spec);
  const double rot_jitter = spec.rot_jitter_deg * M_PI / 180.0;
  const double margin = spec.glyph_size / 2.0 + 14.0;

  std::vector<Mark> marks;  // class marks, base marks, then distractors
  for (const Mark& proto : layout.classes[class_id]) {
    Mark m = proto;
    m.x = std::clamp(m.x + rng.normal(0, spec.pos_jitter), margin, spec.canvas - margin);
    m.y = std::clamp(m.y + rng.normal(0, spec.pos_jitter), margin, spec.canvas - margin);
    m.rot = rng.uniform(-rot_jitter, rot_jitter);
    marks.push_back(m);
  }
  for (const Mark& proto : layout.base) {
    Mark m = proto;
    m.x = std::clamp(m.x + rng.normal(0, spec.pos_jitter), margin, spec.canvas - margin);
    m.y = std::clamp(m.y + rng.normal(0, spec.pos_jitter), margin, spec.canvas - margin);
    m.rot = rng.uniform(-rot_jitter, rot_jitter);
    marks.push_back(m);
  }
  for (int d = 0; d < spec.distractors; ++d) {
    Mark m;
    m.glyph = static_cast<int>(rng.below(static_cast<std::uint64_t>(layout.vocabulary)));
    place_separated(rng, margin, spec.canvas - margin, spec.min_separation, marks, &m.x, &m.y);
    m.rot = rng.uniform(-rot_jitter, rot_jitter);
    marks.push_back(m);
  }

  for (const Mark& m : marks) render_glyph(img, m, spec.glyph_size, layout.vocabulary);

  if (spec.noise_sigma > 0.0) {
    for (auto& p : img.pixels) {
      p = static_cast<float>(std::clamp(p + rng.normal(0.0, spec.noise_sigma), 0.0, 1.0));
    }
  }

  SynthImage out;
  out.image = std::move(img);
  out.entry.label = "class_" + std::string(class_id < 10 ? "0" : "") + std::to_string(class_id);
  out.entry.bbox = {0, 0, spec.canvas, spec.canvas};
  out.entry.split = test_split ? "test" : "train";
  for (const Mark& m : marks) out.entry.landmarks.push_back({m.x, m.y});
  out.entry.stable_landmarks = 3 + spec.base_marks;
  return out;
}

SynthCorpus generate_synth_corpus(const SynthSpec& spec, const std::string& out_dir) {
  if (spec.classes < 2) throw ConfigError("synth: need at least 2 classes");
  if (spec.canvas < 4 * spec.glyph_size) throw ConfigError("synth: canvas too small");

  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  fs::create_directories(root / "images");

  SynthCorpus corpus;
  for (int c = 0; c < spec.classes; ++c) {
    corpus.class_names.push_back("class_" + std::string(c < 10 ? "0" : "") + std::to_string(c));
  }

  int index = 0;
  const auto emit = [&](bool test_split, int per_class, std::vector<ManifestEntry>* entries) {
    // Classes interleave so manifest order round-robins across labels.
    for (int s = 0; s < per_class; ++s) {
      for (int c = 0; c < spec.classes; ++c) {
        SynthImage si = render_synth_image(spec, c, s, test_split);
        char name[32];
        std::snprintf(name, sizeof(name), "img_%05d.png", index++);
        const std::string rel = std::string("images/") + name;
        write_png((root / rel).string(), si.image);
        si.entry.path = rel;
        entries->push_back(std::move(si.entry));
      }
    }
  };

  emit(false, spec.train_per_class, &corpus.train);
  emit(true, spec.test_per_class, &corpus.test);

  corpus.train_manifest = (root / "train.jsonl").string();
  corpus.test_manifest = (root / "test.jsonl").string();
  save_manifest(corpus.train_manifest, corpus.train);
  save_manifest(corpus.test_manifest, corpus.test);
  // Reload so returned entries carry resolved absolute-ish paths.
  corpus.train = load_manifest(corpus.train_manifest);
  corpus.test = load_manifest(corpus.test_manifest);
  return corpus;
}

}  // namespace botmine
