#include <cmath>
#include <functional>

#include "tda/gradcheck.hpp"
#include "tda/kernels.hpp"
#include "tda/loss_gradcheck.hpp"
#include "tda/objectives.hpp"

namespace tda {

namespace {

enum class LossKind {
  classification,
  task_disc,
  teacher,
  prior_disc,
  prior_fool,
  entropy,
  smoothness,
  domain_disc_side,
  domain_enc_side,
};

constexpr LossKind kAllLosses[] = {
    LossKind::classification, LossKind::task_disc,  LossKind::teacher,
    LossKind::prior_disc,     LossKind::prior_fool, LossKind::entropy,
    LossKind::smoothness,     LossKind::domain_disc_side, LossKind::domain_enc_side,
};

const char* loss_name(LossKind k) {
  switch (k) {
    case LossKind::classification: return "classification";
    case LossKind::task_disc: return "task-disc";
    case LossKind::teacher: return "teacher";
    case LossKind::prior_disc: return "prior-disc";
    case LossKind::prior_fool: return "prior-fool";
    case LossKind::entropy: return "entropy";
    case LossKind::smoothness: return "smoothness";
    case LossKind::domain_disc_side: return "domain-baseline-disc";
    case LossKind::domain_enc_side: return "domain-baseline-enc";
  }
  return "?";
}

/// Groups whose gradient the loss is supposed to produce (and which the
/// difference oracle therefore perturbs). The teacher loss deliberately
/// excludes the classifier (its pseudo-label is stopped) and the
/// prior-fooling loss excludes the frozen prior discriminator; those two
/// exact-zero contracts are asserted separately by the tests.
TrainableSet checked_groups(LossKind k) {
  TrainableSet t;
  t.encoder = true;
  switch (k) {
    case LossKind::classification:
    case LossKind::entropy:
    case LossKind::smoothness:
      t.classifier = true;
      break;
    case LossKind::task_disc:
    case LossKind::teacher:
      t.task_disc = true;
      break;
    case LossKind::prior_disc:
      t.prior_disc = true;
      break;
    case LossKind::prior_fool:
      break;
    case LossKind::domain_disc_side:
    case LossKind::domain_enc_side:
      t.domain_disc = true;
      break;
  }
  return t;
}

NodeId build_loss(LossBuilder& lb, LossKind k) {
  switch (k) {
    case LossKind::classification: return lb.classification();
    case LossKind::task_disc: return lb.task_disc_total();
    case LossKind::teacher: return lb.teacher();
    case LossKind::prior_disc: return lb.prior_disc();
    case LossKind::prior_fool: return lb.prior_fool();
    case LossKind::entropy: return lb.entropy();
    case LossKind::smoothness: return lb.smoothness();
    case LossKind::domain_disc_side: return lb.domain_baseline(false);
    case LossKind::domain_enc_side: return lb.domain_baseline(true);
  }
  throw Error("unknown loss kind");
}

struct CaseSetup {
  Model model;
  Batch batch;
};

std::vector<int> random_labels(Rng& rng, int n, int k) {
  std::vector<int> out(n);
  for (int& l : out) l = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k)));
  return out;
}

CaseSetup draw_case(Rng& rng) {
  const int d = 2 + static_cast<int>(rng.next_below(3));
  const int p = 2 + static_cast<int>(rng.next_below(3));
  const int k = 2 + static_cast<int>(rng.next_below(3));
  const int ns = 2 + static_cast<int>(rng.next_below(3));
  const int nt = 2 + static_cast<int>(rng.next_below(3));

  ArchConfig arch;
  arch.latent_dim = p;
  arch.encoder_hidden = {3 + static_cast<int>(rng.next_below(3))};
  arch.classifier_hidden = {3 + static_cast<int>(rng.next_below(3))};
  arch.task_disc_hidden = {3 + static_cast<int>(rng.next_below(3))};
  arch.binary_disc_hidden = {3 + static_cast<int>(rng.next_below(3))};

  CaseSetup cs;
  cs.model = init_model(d, k, arch, rng.next_u64());
  Rng noise = rng.split(rng.next_u64());
  cs.batch.x_src = sample_standard_normal(noise, ns, d);
  cs.batch.x_tgt = sample_standard_normal(noise, nt, d);
  cs.batch.y_src = one_hot(random_labels(noise, ns, k), k);
  cs.batch.eps_src = sample_standard_normal(noise, ns, p);
  cs.batch.eps_tgt = sample_standard_normal(noise, nt, p);
  cs.batch.eps_tgt2 = sample_standard_normal(noise, nt, p);
  cs.batch.z_prior = sample_standard_normal(noise, ns, p);
  return cs;
}

double min_abs(const Matrix& m) {
  double best = std::fabs(m(0, 0));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) best = std::min(best, std::fabs(m(i, j)));
  return best;
}

double min_entry(const Matrix& m) {
  double best = m(0, 0);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) best = std::min(best, m(i, j));
  return best;
}

double max_entry(const Matrix& m) {
  double best = m(0, 0);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) best = std::max(best, m(i, j));
  return best;
}

std::vector<Matrix> encoder_preactivations(const EncoderParams& p, const Matrix& x) {
  std::vector<Matrix> pre;
  Matrix a = x;
  Matrix t;
  for (std::size_t i = 0; i < p.w.size(); ++i) {
    kernels::matmul(a, false, p.w[i], false, t, false);
    Matrix lin;
    kernels::bias_add(t, p.b[i], lin);
    pre.push_back(lin);
    kernels::leaky_relu(lin, p.spec.leaky_slope, a);
  }
  return pre;
}

/// A two-sided difference with step 1e-5 is only trustworthy when nothing
/// it evaluates sits within reach of a kink. Margins are two orders wider
/// than any movement a single 1e-5 perturbation can cause here.
bool case_valid(const CaseSetup& cs, bool needs_smooth_gap) {
  constexpr double kKinkMargin = 1e-3;
  constexpr double kProbMargin = 1e-5;

  const Model& m = cs.model;
  const Batch& b = cs.batch;
  const LatentBatch zs = encode(m.encoder, b.x_src, b.eps_src);
  const LatentBatch zt = encode(m.encoder, b.x_tgt, b.eps_tgt);
  const LatentBatch zt2 = encode(m.encoder, b.x_tgt, b.eps_tgt2);

  auto relu_ok = [&](const std::vector<Matrix>& pre) {
    for (const Matrix& p : pre)
      if (min_abs(p) < kKinkMargin) return false;
    return true;
  };
  for (const Matrix* x : {&b.x_src, &b.x_tgt}) {
    if (!relu_ok(encoder_preactivations(m.encoder, *x))) return false;
  }
  for (const Matrix* z : {&zs.z, &zt.z, &zt2.z}) {
    if (!relu_ok(mlp_preactivations(m.classifier, *z))) return false;
  }
  for (const Matrix* z : {&zs.z, &zt.z}) {
    if (!relu_ok(mlp_preactivations(m.task_disc, *z))) return false;
    if (!relu_ok(mlp_preactivations(m.domain_disc, *z))) return false;
  }
  for (const Matrix* z : {&b.z_prior, &zs.z}) {
    if (!relu_ok(mlp_preactivations(m.prior_disc, *z))) return false;
  }

  auto probs_ok = [&](const Matrix& p) {
    return min_entry(p) > kProbMargin && max_entry(p) < 1.0 - kProbMargin;
  };
  const Matrix h_t = classify(m, zt.z);
  const Matrix h_t2 = classify(m, zt2.z);
  if (!probs_ok(classify(m, zs.z)) || !probs_ok(h_t) || !probs_ok(h_t2)) return false;
  if (!probs_ok(discriminate_task(m, zs.z)) || !probs_ok(discriminate_task(m, zt.z)))
    return false;
  if (!probs_ok(mlp_apply(m.prior_disc, b.z_prior)) || !probs_ok(mlp_apply(m.prior_disc, zs.z)))
    return false;
  if (!probs_ok(mlp_apply(m.domain_disc, zs.z)) || !probs_ok(mlp_apply(m.domain_disc, zt.z)))
    return false;

  if (needs_smooth_gap) {
    Matrix gap;
    kernels::sub(h_t, h_t2, gap);
    if (min_abs(gap) < kKinkMargin) return false;
  }
  return true;
}

std::vector<ParamRef> refs_for(Model& m, const TrainableSet& t) {
  std::vector<ParamRef> out;
  if (t.encoder)
    for (auto& r : encoder_param_refs(m.encoder, kPrefixEncoder)) out.push_back(r);
  if (t.classifier)
    for (auto& r : mlp_param_refs(m.classifier, kPrefixClassifier)) out.push_back(r);
  if (t.task_disc)
    for (auto& r : mlp_param_refs(m.task_disc, kPrefixTaskDisc)) out.push_back(r);
  if (t.prior_disc)
    for (auto& r : mlp_param_refs(m.prior_disc, kPrefixPriorDisc)) out.push_back(r);
  if (t.domain_disc)
    for (auto& r : mlp_param_refs(m.domain_disc, kPrefixDomainDisc)) out.push_back(r);
  return out;
}

}  // namespace

LossCheckReport run_loss_gradchecks(int cases_per_loss, double tolerance, std::uint64_t seed) {
  if (cases_per_loss < 1) throw Error("gradcheck: need at least one case per loss");
  LossCheckReport report;
  report.tolerance = tolerance;
  const Rng master(seed);

  int stream = 0;
  for (LossKind kind : kAllLosses) {
    for (int i = 0; i < cases_per_loss; ++i) {
      Rng rng = master.split(static_cast<std::uint64_t>(++stream));
      CaseSetup cs = draw_case(rng);
      int attempts = 0;
      while (!case_valid(cs, kind == LossKind::smoothness)) {
        if (++attempts > 500) throw Error("gradcheck: could not draw a kink-free case");
        cs = draw_case(rng);
      }

      const TrainableSet groups = checked_groups(kind);

      // analytic gradients from one reverse pass
      Gradients analytic;
      {
        Graph g;
        LossBuilder lb(g, cs.model, cs.batch, groups);
        const NodeId loss = build_loss(lb, kind);
        g.forward();
        analytic = g.backward(loss);
      }

      // the teacher's pseudo-label is stopped, so its oracle must hold the
      // pseudo-label fixed at the unperturbed value while differencing
      Matrix fixed_pseudo;
      if (kind == LossKind::teacher) {
        const LatentBatch zt = encode(cs.model.encoder, cs.batch.x_tgt, cs.batch.eps_tgt);
        const Matrix h_t = classify(cs.model, zt.z);
        fixed_pseudo = Matrix(h_t.rows(), cs.model.k + 1);
        for (int r = 0; r < h_t.rows(); ++r)
          for (int c = 0; c < h_t.cols(); ++c) fixed_pseudo(r, c) = h_t(r, c);
      }

      auto eval = [&]() {
        Graph g;
        LossBuilder lb(g, cs.model, cs.batch, TrainableSet{});
        if (kind == LossKind::teacher) lb.fix_teacher_pseudo(fixed_pseudo);
        const NodeId loss = build_loss(lb, kind);
        g.forward();
        return g.scalar(loss);
      };

      LossCheckCase result;
      result.loss = loss_name(kind);
      result.index = i;
      for (ParamRef& ref : refs_for(cs.model, groups)) {
        auto it = analytic.find(ref.name);
        if (it == analytic.end()) throw Error("gradcheck: no gradient for '" + ref.name + "'");
        const Matrix fd = finite_diff_grad(*ref.tensor, eval);
        result.max_rel_err = std::max(result.max_rel_err, max_rel_err(it->second, fd));
        result.params_checked += static_cast<int>(ref.tensor->size());
      }
      result.pass = result.max_rel_err < tolerance;
      report.worst_rel_err = std::max(report.worst_rel_err, result.max_rel_err);
      ++report.total;
      if (!result.pass) ++report.failed;
      report.cases.push_back(std::move(result));
    }
  }
  return report;
}

}  // namespace tda
