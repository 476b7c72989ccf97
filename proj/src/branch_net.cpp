#include "vqa/branch_net.hpp"

#include <cmath>
#include <string>

#include "vqa/error.hpp"

namespace vqa {

namespace {

// Visits every trainable tensor in a fixed order. Works for const and
// non-const nets.
template <typename Net, typename F>
void visit_params(Net& net, F&& f) {
  for (auto* d : {&net.technical_enc, &net.aesthetic_enc, &net.semantic_enc}) {
    f(d->weight);
    f(d->bias);
  }
  for (auto* s : {&net.aesthetic_fusion, &net.technical_fusion}) {
    f(s->input_proj);
    f(s->gate_proj);
    f(s->output_proj);
  }
  for (auto* h : {&net.semantic_head, &net.aesthetic_head, &net.technical_head}) {
    f(h->hidden.weight);
    f(h->hidden.bias);
    f(h->out.weight);
    f(h->out.bias);
  }
}

VectorXd sigmoid(const VectorXd& v) {
  return v.unaryExpr([](double a) { return 1.0 / (1.0 + std::exp(-a)); });
}

VectorXd tanh_of(const VectorXd& v) {
  return v.unaryExpr([](double a) { return std::tanh(a); });
}

MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(cols)));
  MatrixXd m(rows, cols);
  // Column-major fill order is part of the seed contract.
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Dense random_dense(int out, int in, std::mt19937_64& rng) { return {random_matrix(out, in, rng), VectorXd::Zero(out)}; }

Head random_head(int in, int hidden, std::mt19937_64& rng) {
  return {random_dense(hidden, in, rng), random_dense(1, hidden, rng)};
}

ScgbParams random_scgb(int dim_x, int dim_y, int proj, std::mt19937_64& rng) {
  return {random_matrix(proj, dim_x, rng), random_matrix(proj, dim_y, rng), random_matrix(dim_x, proj, rng), 0.1};
}

void check_finite(const VectorXd& v, const char* where) {
  if (!v.allFinite()) throw NumericalError(std::string("non-finite activation in ") + where);
}

void check_scgb_dims(const VectorXd& x, const VectorXd& y, const ScgbParams& p) {
  if (p.input_proj.cols() != x.size() || p.gate_proj.cols() != y.size() ||
      p.input_proj.rows() != p.gate_proj.rows() || p.output_proj.cols() != p.input_proj.rows() ||
      p.output_proj.rows() != x.size()) {
    throw DimensionMismatch("SCGB projections do not match inputs of size " + std::to_string(x.size()) + " and " +
                            std::to_string(y.size()));
  }
}

double head_forward(const Head& h, const VectorXd& z, VectorXd& hidden) {
  hidden = tanh_of(h.hidden.weight * z + h.hidden.bias);
  return (h.out.weight * hidden + h.out.bias)(0);
}

// Returns d(loss)/d(z).
VectorXd head_backward(const Head& h, const VectorXd& z, const VectorXd& hidden, double dq, Head& g) {
  g.out.weight.noalias() += dq * hidden.transpose();
  g.out.bias(0) += dq;
  const VectorXd dpre = (h.out.weight.transpose() * dq).cwiseProduct((1.0 - hidden.array().square()).matrix());
  g.hidden.weight.noalias() += dpre * z.transpose();
  g.hidden.bias += dpre;
  return h.hidden.weight.transpose() * dpre;
}

void encoder_backward(const Dense& /*enc*/, const VectorXd& x, const VectorXd& h, const VectorXd& dh, Dense& g) {
  const VectorXd dpre = dh.cwiseProduct((1.0 - h.array().square()).matrix());
  g.weight.noalias() += dpre * x.transpose();
  g.bias += dpre;
}

}  // namespace

InputScaler InputScaler::fit(std::span<const FeatureVector> rows) {
  InputScaler s;
  if (rows.empty()) return s;
  const double n = static_cast<double>(rows.size());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r.values[f];
    mean /= n;
    double ss = 0.0;
    for (const auto& r : rows) ss += (r.values[f] - mean) * (r.values[f] - mean);
    const double sd = std::sqrt(ss / n);
    s.mean[f] = mean;
    s.scale[f] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  return s;
}

BranchNet init_branch_net(const BranchNetDims& d, std::uint64_t seed) {
  if (d.technical_in < 1 || d.aesthetic_in < 1 || d.semantic_in < 1 || d.hidden < 1 || d.proj < 1 ||
      d.head_hidden < 1) {
    throw Error("branch net dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  BranchNet net;
  net.dims = d;
  net.init_seed = seed;
  net.technical_enc = random_dense(d.hidden, d.technical_in, rng);
  net.aesthetic_enc = random_dense(d.hidden, d.aesthetic_in, rng);
  net.semantic_enc = random_dense(d.hidden, d.semantic_in, rng);
  net.aesthetic_fusion = random_scgb(d.hidden, d.hidden, d.proj, rng);
  net.technical_fusion = random_scgb(d.hidden, d.hidden, d.proj, rng);
  net.semantic_head = random_head(d.hidden, d.head_hidden, rng);
  net.aesthetic_head = random_head(d.hidden, d.head_hidden, rng);
  net.technical_head = random_head(d.hidden, d.head_hidden, rng);
  return net;
}

BranchNet zeros_like(const BranchNet& net) {
  BranchNet z = net;
  visit_params(z, [](auto& m) { m.setZero(); });
  return z;
}

std::size_t parameter_count(const BranchNet& net) {
  std::size_t n = 0;
  visit_params(net, [&](const auto& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

std::vector<double> flatten_parameters(const BranchNet& net) {
  std::vector<double> out;
  out.reserve(parameter_count(net));
  visit_params(net, [&](const auto& m) { out.insert(out.end(), m.data(), m.data() + m.size()); });
  return out;
}

void assign_parameters(BranchNet& net, std::span<const double> params) {
  if (params.size() != parameter_count(net)) {
    throw DimensionMismatch("expected " + std::to_string(parameter_count(net)) + " parameters, got " +
                            std::to_string(params.size()));
  }
  std::size_t at = 0;
  visit_params(net, [&](auto& m) {
    std::copy(params.begin() + static_cast<std::ptrdiff_t>(at),
              params.begin() + static_cast<std::ptrdiff_t>(at + static_cast<std::size_t>(m.size())), m.data());
    at += static_cast<std::size_t>(m.size());
  });
}

BranchInputs route_features(const BranchNet& net, const FeatureVector& fv) {
  auto pick = [&](auto features) {
    VectorXd v(static_cast<Eigen::Index>(features.size()));
    for (std::size_t i = 0; i < features.size(); ++i) {
      const auto f = static_cast<std::size_t>(features[i]);
      v(static_cast<Eigen::Index>(i)) = (fv.values[f] - net.scaler.mean[f]) * net.scaler.scale[f];
    }
    return v;
  };
  return {pick(kTechnicalFeatures), pick(kAestheticFeatures), pick(kSemanticFeatures)};
}

VectorXd scgb_fuse(const VectorXd& x, const VectorXd& y, const ScgbParams& p) {
  check_scgb_dims(x, y, p);
  const VectorXd u = p.input_proj * x;
  const VectorXd g = sigmoid(p.gate_proj * y);
  return p.output_proj * u.cwiseProduct(g) + x;
}

DropoutMasks sample_dropout(const BranchNet& net, std::mt19937_64& rng) {
  auto mask = [&](const ScgbParams& p) {
    const double rate = p.gate_dropout;
    VectorXd m(p.input_proj.rows());
    std::bernoulli_distribution keep(1.0 - rate);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = keep(rng) ? 1.0 / (1.0 - rate) : 0.0;
    return m;
  };
  DropoutMasks masks;
  masks.aesthetic = mask(net.aesthetic_fusion);
  masks.technical = mask(net.technical_fusion);
  return masks;
}

BranchScores forward(const BranchNet& net, const BranchInputs& in, ForwardCache* cache, const DropoutMasks* masks) {
  const auto& d = net.dims;
  if (in.technical.size() != d.technical_in || in.aesthetic.size() != d.aesthetic_in ||
      in.semantic.size() != d.semantic_in) {
    throw DimensionMismatch("branch inputs do not match network dimensions");
  }
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.in = in;
  c.h_t = tanh_of(net.technical_enc.weight * in.technical + net.technical_enc.bias);
  c.h_a = tanh_of(net.aesthetic_enc.weight * in.aesthetic + net.aesthetic_enc.bias);
  c.h_s = tanh_of(net.semantic_enc.weight * in.semantic + net.semantic_enc.bias);
  check_finite(c.h_t, "technical encoder");
  check_finite(c.h_a, "aesthetic encoder");
  check_finite(c.h_s, "semantic encoder");

  auto fuse = [&](const ScgbParams& p, const VectorXd& x, const VectorXd* mask, VectorXd& u, VectorXd& g) {
    check_scgb_dims(x, c.h_s, p);
    u = p.input_proj * x;
    g = sigmoid(p.gate_proj * c.h_s);
    VectorXd v = u.cwiseProduct(g);
    if (mask) v = v.cwiseProduct(*mask);
    return VectorXd(p.output_proj * v + x);
  };
  c.fused_a = fuse(net.aesthetic_fusion, c.h_a, masks ? &masks->aesthetic : nullptr, c.u_a, c.g_a);
  c.fused_t = fuse(net.technical_fusion, c.h_t, masks ? &masks->technical : nullptr, c.u_t, c.g_t);
  check_finite(c.fused_a, "aesthetic fusion");
  check_finite(c.fused_t, "technical fusion");
  if (masks) {
    c.masks = *masks;
  } else {
    c.masks.reset();
  }

  BranchScores s;
  s.q_s = head_forward(net.semantic_head, c.h_s, c.z_s);
  s.q_a = head_forward(net.aesthetic_head, c.fused_a, c.z_a);
  s.q_t = head_forward(net.technical_head, c.fused_t, c.z_t);
  if (!std::isfinite(s.q_s) || !std::isfinite(s.q_a) || !std::isfinite(s.q_t)) {
    throw NumericalError("non-finite branch score");
  }
  return s;
}

BranchScores forward(const BranchNet& net, const FeatureVector& fv) { return forward(net, route_features(net, fv)); }

void backward(const BranchNet& net, const ForwardCache& c, const BranchScores& up, BranchNet& g) {
  VectorXd dh_s = head_backward(net.semantic_head, c.h_s, c.z_s, up.q_s, g.semantic_head);
  const VectorXd dfused_a = head_backward(net.aesthetic_head, c.fused_a, c.z_a, up.q_a, g.aesthetic_head);
  const VectorXd dfused_t = head_backward(net.technical_head, c.fused_t, c.z_t, up.q_t, g.technical_head);

  // fused = P_o v + x, v = u .* gate .* mask, u = P_x x, gate = sigmoid(P_y h_s)
  auto fusion_backward = [&](const ScgbParams& p, const VectorXd& x, const VectorXd& u, const VectorXd& gate,
                             const VectorXd* mask, const VectorXd& dfused, ScgbParams& gp) {
    VectorXd v = u.cwiseProduct(gate);
    VectorXd dv = p.output_proj.transpose() * dfused;
    if (mask) {
      v = v.cwiseProduct(*mask);
      dv = dv.cwiseProduct(*mask);
    }
    gp.output_proj.noalias() += dfused * v.transpose();
    const VectorXd du = dv.cwiseProduct(gate);
    const VectorXd dgate_logit = dv.cwiseProduct(u).cwiseProduct(gate).cwiseProduct((1.0 - gate.array()).matrix());
    gp.input_proj.noalias() += du * x.transpose();
    gp.gate_proj.noalias() += dgate_logit * c.h_s.transpose();
    dh_s.noalias() += p.gate_proj.transpose() * dgate_logit;
    return VectorXd(dfused + p.input_proj.transpose() * du);
  };
  const VectorXd* mask_a = c.masks ? &c.masks->aesthetic : nullptr;
  const VectorXd* mask_t = c.masks ? &c.masks->technical : nullptr;
  const VectorXd dh_a = fusion_backward(net.aesthetic_fusion, c.h_a, c.u_a, c.g_a, mask_a, dfused_a, g.aesthetic_fusion);
  const VectorXd dh_t =
      fusion_backward(net.technical_fusion, c.h_t, c.u_t, c.g_t, mask_t, dfused_t, g.technical_fusion);

  encoder_backward(net.technical_enc, c.in.technical, c.h_t, dh_t, g.technical_enc);
  encoder_backward(net.aesthetic_enc, c.in.aesthetic, c.h_a, dh_a, g.aesthetic_enc);
  encoder_backward(net.semantic_enc, c.in.semantic, c.h_s, dh_s, g.semantic_enc);
}

}  // namespace vqa
