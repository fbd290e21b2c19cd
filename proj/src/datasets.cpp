#include <algorithm>
#include <cmath>
#include <fstream>

#include "tda/datasets.hpp"
#include "tda/error.hpp"

namespace tda {

DomainDataset::DomainDataset(Matrix inputs, std::vector<int> labels, int num_classes,
                             Domain domain, DataKind kind, std::string provenance,
                             bool hold_out_labels)
    : inputs_(std::move(inputs)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      domain_(domain),
      kind_(kind),
      provenance_(std::move(provenance)),
      hold_out_(hold_out_labels) {
  if (!labels_.empty() && static_cast<int>(labels_.size()) != inputs_.rows())
    throw ShapeError("dataset: label count != row count");
  if (num_classes_ < 2) throw Error("dataset: need at least two classes");
  for (int l : labels_) {
    if (l < 0 || l >= num_classes_)
      throw Error("dataset: label " + std::to_string(l) + " outside [0, " +
                  std::to_string(num_classes_) + ")");
  }
}

DomainDataset DomainDataset::unlabeled(Matrix inputs, Domain domain, DataKind kind,
                                       std::string provenance) {
  DomainDataset ds(std::move(inputs), {}, 2, domain, kind, std::move(provenance), true);
  return ds;
}

const std::vector<int>* DomainDataset::training_labels() const {
  if (labels_.empty() || hold_out_) return nullptr;
  return &labels_;
}

const std::vector<int>& DomainDataset::evaluation_labels() const {
  if (labels_.empty()) throw Error("dataset: no labels to evaluate against");
  return labels_;
}

DomainDataset DomainDataset::retagged(Domain domain, bool hold_out_labels) const {
  DomainDataset out = *this;
  out.domain_ = domain;
  out.hold_out_ = hold_out_labels;
  return out;
}

DomainDataset make_two_moons(int n, double noise_std, std::uint64_t seed) {
  if (n < 2) throw Error("two_moons: need at least 2 points");
  if (n % 2 != 0) throw Error("two_moons: point count must be even");
  if (noise_std < 0.0) throw Error("two_moons: negative noise");
  const int half = n / 2;
  const double pi = 3.14159265358979323846;
  Matrix x(n, 2);
  std::vector<int> labels(n);
  for (int i = 0; i < half; ++i) {
    const double t = half > 1 ? pi * static_cast<double>(i) / static_cast<double>(half - 1)
                              : 0.0;
    x(i, 0) = std::cos(t);
    x(i, 1) = std::sin(t);
    labels[i] = 0;
    x(half + i, 0) = 1.0 - std::cos(t);
    x(half + i, 1) = 0.5 - std::sin(t);
    labels[half + i] = 1;
  }
  if (noise_std > 0.0) {
    Rng rng = Rng(seed).split(kStreamDataSource);
    Matrix noise = sample_standard_normal(rng, n, 2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2; ++j) x(i, j) += noise_std * noise(i, j);
  }
  return DomainDataset(std::move(x), std::move(labels), 2, Domain::source,
                       DataKind::synthetic, "two-moons", false);
}

DomainDataset make_gaussian_mixture(const Matrix& means, int n_per_class, double noise_std,
                                    std::uint64_t seed) {
  const int k = means.rows();
  const int d = means.cols();
  if (k < 2) throw Error("gaussian_mixture: need at least two component means");
  if (n_per_class < 1) throw Error("gaussian_mixture: n_per_class must be positive");
  if (noise_std < 0.0) throw Error("gaussian_mixture: negative noise");
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      bool same = true;
      for (int j = 0; j < d && same; ++j) same = means(a, j) == means(b, j);
      if (same)
        throw Error("gaussian_mixture: duplicate means for components " + std::to_string(a) +
                    " and " + std::to_string(b));
    }
  }
  const int n = k * n_per_class;
  Matrix x(n, d);
  std::vector<int> labels(n);
  Rng rng = Rng(seed).split(kStreamDataSource);
  Matrix noise = sample_standard_normal(rng, n, d);
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < n_per_class; ++i) {
      const int row = c * n_per_class + i;
      for (int j = 0; j < d; ++j) x(row, j) = means(c, j) + noise_std * noise(row, j);
      labels[row] = c;
    }
  }
  return DomainDataset(std::move(x), std::move(labels), k, Domain::source,
                       DataKind::synthetic, "gaussian-mixture", false);
}

DomainDataset apply_shift(const DomainDataset& ds, const ShiftSpec& spec, std::uint64_t seed) {
  const int n = ds.n();
  const int d = ds.dim();
  if (spec.rotation_rad != 0.0 && d < 2)
    throw ShapeError("apply_shift: rotation needs at least two features");
  if (!spec.scale.empty() && static_cast<int>(spec.scale.size()) != d)
    throw ShapeError("apply_shift: scale size != feature count");
  if (!spec.translate.empty() && static_cast<int>(spec.translate.size()) != d)
    throw ShapeError("apply_shift: translate size != feature count");
  for (double s : spec.scale)
    if (!(s > 0.0)) throw Error("apply_shift: scale entries must be positive");
  if (spec.noise_std < 0.0) throw Error("apply_shift: negative noise");

  Matrix x = ds.inputs();
  for (int i = 0; i < n; ++i) {
    double* row = x.row(i);
    if (!spec.scale.empty())
      for (int j = 0; j < d; ++j) row[j] *= spec.scale[j];
    if (spec.rotation_rad != 0.0) {
      const double c = std::cos(spec.rotation_rad);
      const double s = std::sin(spec.rotation_rad);
      const double x0 = row[0];
      const double x1 = row[1];
      row[0] = c * x0 - s * x1;
      row[1] = s * x0 + c * x1;
    }
    if (!spec.translate.empty())
      for (int j = 0; j < d; ++j) row[j] += spec.translate[j];
  }
  if (spec.noise_std > 0.0) {
    Rng rng = Rng(seed).split(kStreamDataShift);
    Matrix noise = sample_standard_normal(rng, n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) x(i, j) += spec.noise_std * noise(i, j);
  }
  std::vector<int> labels;
  if (ds.has_labels()) labels = ds.evaluation_labels();
  return DomainDataset(std::move(x), std::move(labels), ds.num_classes(), ds.domain(),
                       ds.kind(), ds.provenance() + "+shift", ds.labels_held_out());
}

namespace {

std::uint32_t read_be_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IoError("idx: truncated header in '" + path + "'");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Matrix read_idx_images(const std::string& path, int* height, int* width) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("idx: cannot open '" + path + "'");
  const std::uint32_t magic = read_be_u32(is, path);
  if ((magic >> 8) != 0x08)
    throw IoError("idx: '" + path + "' is not an unsigned-byte IDX file");
  const unsigned ndims = magic & 0xff;
  if (ndims != 3)
    throw IoError("idx: '" + path + "' has " + std::to_string(ndims) +
                  " dimensions, expected 3 for images");
  const std::uint32_t count = read_be_u32(is, path);
  const std::uint32_t h = read_be_u32(is, path);
  const std::uint32_t w = read_be_u32(is, path);
  if (count == 0 || h == 0 || w == 0) throw IoError("idx: empty tensor in '" + path + "'");
  if (static_cast<std::uint64_t>(count) * h * w > (1ull << 31))
    throw IoError("idx: '" + path + "' larger than supported");
  Matrix out(static_cast<int>(count), static_cast<int>(h * w));
  std::vector<unsigned char> buf(static_cast<std::size_t>(h) * w);
  for (std::uint32_t i = 0; i < count; ++i) {
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!is) throw IoError("idx: truncated pixel data in '" + path + "'");
    double* row = out.row(static_cast<int>(i));
    for (std::size_t j = 0; j < buf.size(); ++j) row[j] = static_cast<double>(buf[j]);
  }
  if (height) *height = static_cast<int>(h);
  if (width) *width = static_cast<int>(w);
  return out;
}

std::vector<int> read_idx_labels(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("idx: cannot open '" + path + "'");
  const std::uint32_t magic = read_be_u32(is, path);
  if ((magic >> 8) != 0x08)
    throw IoError("idx: '" + path + "' is not an unsigned-byte IDX file");
  const unsigned ndims = magic & 0xff;
  if (ndims != 1)
    throw IoError("idx: '" + path + "' has " + std::to_string(ndims) +
                  " dimensions, expected 1 for labels");
  const std::uint32_t count = read_be_u32(is, path);
  std::vector<unsigned char> buf(count);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!is) throw IoError("idx: truncated label data in '" + path + "'");
  return std::vector<int>(buf.begin(), buf.end());
}

void write_idx_images(const std::string& path, const Matrix& rows, int height, int width) {
  if (height * width != rows.cols()) throw ShapeError("idx: height*width != feature count");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("idx: cannot open '" + path + "' for writing");
  write_be_u32(os, 0x00000803);
  write_be_u32(os, static_cast<std::uint32_t>(rows.rows()));
  write_be_u32(os, static_cast<std::uint32_t>(height));
  write_be_u32(os, static_cast<std::uint32_t>(width));
  for (int i = 0; i < rows.rows(); ++i) {
    const double* r = rows.row(i);
    for (int j = 0; j < rows.cols(); ++j) {
      double v = r[j];
      if (v < 0.0) v = 0.0;
      if (v > 255.0) v = 255.0;
      const unsigned char b = static_cast<unsigned char>(v);
      os.write(reinterpret_cast<const char*>(&b), 1);
    }
  }
  if (!os) throw IoError("idx: write to '" + path + "' failed");
}

void write_idx_labels(const std::string& path, const std::vector<int>& labels) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("idx: cannot open '" + path + "' for writing");
  write_be_u32(os, 0x00000801);
  write_be_u32(os, static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) {
    if (l < 0 || l > 255) throw Error("idx: label out of byte range");
    const unsigned char b = static_cast<unsigned char>(l);
    os.write(reinterpret_cast<const char*>(&b), 1);
  }
  if (!os) throw IoError("idx: write to '" + path + "' failed");
}

DomainDataset load_idx_domain(const std::string& images_path, const std::string& labels_path,
                              Domain domain, bool hold_out_labels) {
  Matrix x = read_idx_images(images_path);
  std::vector<int> labels = read_idx_labels(labels_path);
  if (static_cast<int>(labels.size()) != x.rows())
    throw IoError("idx: " + std::to_string(x.rows()) + " images but " +
                  std::to_string(labels.size()) + " labels");
  int max_label = 0;
  for (int l : labels) max_label = std::max(max_label, l);
  return DomainDataset(std::move(x), std::move(labels), max_label + 1, domain,
                       DataKind::image, "idx", hold_out_labels);
}

DomainDataset rescale_inputs(const DomainDataset& ds) {
  const int n = ds.n();
  const int d = ds.dim();
  Matrix x = ds.inputs();
  auto rescale_span = [](double lo, double hi, double v) {
    if (hi <= lo) return 0.0;  // constant feature carries no information
    return -1.0 + 2.0 * (v - lo) / (hi - lo);
  };
  if (ds.kind() == DataKind::image) {
    double lo = x(0, 0), hi = x(0, 0);
    for (int i = 0; i < n; ++i) {
      const double* row = x.row(i);
      for (int j = 0; j < d; ++j) {
        lo = std::min(lo, row[j]);
        hi = std::max(hi, row[j]);
      }
    }
    for (int i = 0; i < n; ++i) {
      double* row = x.row(i);
      for (int j = 0; j < d; ++j) row[j] = rescale_span(lo, hi, row[j]);
    }
  } else {
    for (int j = 0; j < d; ++j) {
      double lo = x(0, j), hi = x(0, j);
      for (int i = 0; i < n; ++i) {
        lo = std::min(lo, x(i, j));
        hi = std::max(hi, x(i, j));
      }
      for (int i = 0; i < n; ++i) x(i, j) = rescale_span(lo, hi, x(i, j));
    }
  }
  std::vector<int> labels;
  if (ds.has_labels()) labels = ds.evaluation_labels();
  return DomainDataset(std::move(x), std::move(labels), ds.num_classes(), ds.domain(),
                       ds.kind(), ds.provenance(), ds.labels_held_out());
}

DomainDataset subsample(const DomainDataset& ds, int max_n, std::uint64_t seed) {
  if (max_n >= ds.n()) return ds;
  if (max_n < 1) throw Error("subsample: max_n must be positive");
  std::vector<int> idx(ds.n());
  for (int i = 0; i < ds.n(); ++i) idx[i] = i;
  Rng rng = Rng(seed).split(kStreamDataSubsample);
  shuffle_indices(idx, rng);
  idx.resize(max_n);
  std::sort(idx.begin(), idx.end());
  Matrix x(max_n, ds.dim());
  std::vector<int> labels;
  for (int i = 0; i < max_n; ++i) {
    const double* src = ds.inputs().row(idx[i]);
    double* dst = x.row(i);
    for (int j = 0; j < ds.dim(); ++j) dst[j] = src[j];
  }
  if (ds.has_labels()) {
    const auto& all = ds.evaluation_labels();
    labels.reserve(max_n);
    for (int i = 0; i < max_n; ++i) labels.push_back(all[idx[i]]);
  }
  return DomainDataset(std::move(x), std::move(labels), ds.num_classes(), ds.domain(),
                       ds.kind(), ds.provenance(), ds.labels_held_out());
}

DomainDataset block_average(const DomainDataset& ds, int height, int width, int factor) {
  if (factor < 1) throw Error("block_average: factor must be positive");
  if (height * width != ds.dim()) throw ShapeError("block_average: height*width != features");
  if (height % factor != 0 || width % factor != 0)
    throw ShapeError("block_average: factor must divide both image dimensions");
  const int oh = height / factor;
  const int ow = width / factor;
  const double inv = 1.0 / static_cast<double>(factor * factor);
  Matrix x(ds.n(), oh * ow);
  for (int i = 0; i < ds.n(); ++i) {
    const double* src = ds.inputs().row(i);
    double* dst = x.row(i);
    for (int r = 0; r < oh; ++r) {
      for (int c = 0; c < ow; ++c) {
        double s = 0.0;
        for (int dr = 0; dr < factor; ++dr)
          for (int dc = 0; dc < factor; ++dc)
            s += src[(r * factor + dr) * width + (c * factor + dc)];
        dst[r * ow + c] = s * inv;
      }
    }
  }
  std::vector<int> labels;
  if (ds.has_labels()) labels = ds.evaluation_labels();
  return DomainDataset(std::move(x), std::move(labels), ds.num_classes(), ds.domain(),
                       ds.kind(), ds.provenance(), ds.labels_held_out());
}

std::vector<std::vector<int>> epoch_batches(int n, int batch_size, Rng& rng) {
  if (batch_size < 1) throw Error("epoch_batches: batch size must be positive");
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  shuffle_indices(idx, rng);
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(n / batch_size));
  for (int start = 0; start + batch_size <= n; start += batch_size)
    out.emplace_back(idx.begin() + start, idx.begin() + start + batch_size);
  return out;
}

}  // namespace tda
