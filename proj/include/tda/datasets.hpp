#pragma once

#include <string>
#include <vector>

#include "tda/matrix.hpp"
#include "tda/rng.hpp"

namespace tda {

enum class Domain { source, target };

/// Synthetic point clouds get per-feature rescaling; raster images get one
/// global scale so relative pixel intensities survive.
enum class DataKind { synthetic, image };

/// An input matrix plus (optionally) labels. A target domain is normally
/// constructed with held-out labels: training code can see that labels
/// exist but only evaluation_labels() returns them, and the only caller of
/// that accessor should be accuracy scoring.
class DomainDataset {
 public:
  DomainDataset(Matrix inputs, std::vector<int> labels, int num_classes, Domain domain,
                DataKind kind, std::string provenance, bool hold_out_labels);
  static DomainDataset unlabeled(Matrix inputs, Domain domain, DataKind kind,
                                 std::string provenance);

  int n() const { return inputs_.rows(); }
  int dim() const { return inputs_.cols(); }
  int num_classes() const { return num_classes_; }
  const Matrix& inputs() const { return inputs_; }
  Domain domain() const { return domain_; }
  DataKind kind() const { return kind_; }
  const std::string& provenance() const { return provenance_; }
  bool has_labels() const { return !labels_.empty(); }
  bool labels_held_out() const { return hold_out_; }

  /// Labels usable for fitting; null when held out (or absent).
  const std::vector<int>* training_labels() const;
  /// Labels for scoring only. Throws when the dataset has none at all.
  const std::vector<int>& evaluation_labels() const;

  /// Same data re-tagged; moving a dataset to the target role normally
  /// also holds its labels out.
  DomainDataset retagged(Domain domain, bool hold_out_labels) const;

 private:
  Matrix inputs_;
  std::vector<int> labels_;
  int num_classes_ = 0;
  Domain domain_ = Domain::source;
  DataKind kind_ = DataKind::synthetic;
  std::string provenance_;
  bool hold_out_ = false;
};

/// Two interleaved half-circles with Gaussian jitter; class 0 is the upper
/// arc, class 1 the lower shifted arc. n points split as evenly as possible.
DomainDataset make_two_moons(int n, double noise_std, std::uint64_t seed);

/// Isotropic Gaussian blobs at the given means (k x d, one row per class).
/// Duplicate mean rows are rejected.
DomainDataset make_gaussian_mixture(const Matrix& means, int n_per_class, double noise_std,
                                    std::uint64_t seed);

/// Covariate shift: x' = R(theta) (s o x) + t + noise. Rotation acts on the
/// first two coordinates; empty scale/translate mean identity/zero. Labels
/// ride along unchanged.
struct ShiftSpec {
  double rotation_rad = 0.0;
  std::vector<double> scale;      // per-feature, empty = no scaling
  std::vector<double> translate;  // per-feature, empty = no offset
  double noise_std = 0.0;
};

DomainDataset apply_shift(const DomainDataset& ds, const ShiftSpec& spec, std::uint64_t seed);

/// Big-endian IDX container files (images: 3-D u8 tensor, labels: 1-D u8).
Matrix read_idx_images(const std::string& path, int* height = nullptr, int* width = nullptr);
std::vector<int> read_idx_labels(const std::string& path);
void write_idx_images(const std::string& path, const Matrix& rows, int height, int width);
void write_idx_labels(const std::string& path, const std::vector<int>& labels);

DomainDataset load_idx_domain(const std::string& images_path, const std::string& labels_path,
                              Domain domain, bool hold_out_labels);

/// Maps inputs onto [-1, 1]: per feature for synthetic data, one global
/// min/max for images. A constant feature maps to 0.
DomainDataset rescale_inputs(const DomainDataset& ds);

/// Uniform random subset without replacement (all rows if max_n >= n).
DomainDataset subsample(const DomainDataset& ds, int max_n, std::uint64_t seed);

/// Mean-pools factor x factor pixel blocks; height and width must divide.
DomainDataset block_average(const DomainDataset& ds, int height, int width, int factor);

/// One epoch of shuffled minibatch index lists; a short trailing batch is
/// dropped so every step sees the same batch size.
std::vector<std::vector<int>> epoch_batches(int n, int batch_size, Rng& rng);

}  // namespace tda
