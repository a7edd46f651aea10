#include "selfalign/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "selfalign/errors.hpp"
#include "selfalign/kernels.hpp"
#include "selfalign/loss.hpp"

namespace selfalign::theory {

namespace {

void sphere_into(double* out, std::size_t dim, Rng& rng) {
  while (true) {
    for (std::size_t i = 0; i < dim; ++i) out[i] = rng.normal();
    double n = kernels::nrm2(out, dim);
    if (n > 1e-12) {
      kernels::scale(out, 1.0 / n, dim);
      return;
    }
  }
}

std::vector<const double*> row_ptrs(const Mat& m) {
  std::vector<const double*> p(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) p[i] = m.row(i);
  return p;
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // sample variance of one draw
};

MeanVar mean_var(double sum, double sumsq, std::size_t n) {
  MeanVar mv;
  mv.mean = sum / static_cast<double>(n);
  double raw = sumsq / static_cast<double>(n) - mv.mean * mv.mean;
  mv.var = std::max(0.0, raw) * static_cast<double>(n) /
           static_cast<double>(n > 1 ? n - 1 : 1);
  return mv;
}

void require_ascending(const std::vector<std::size_t>& ms) {
  if (ms.empty()) throw ConfigError("ms must be non-empty");
  for (std::size_t i = 0; i + 1 < ms.size(); ++i) {
    if (ms[i] >= ms[i + 1]) throw ConfigError("ms must be strictly ascending");
  }
}

}  // namespace

Mat sample_sphere(std::size_t dim, std::size_t count, Rng& rng) {
  if (dim == 0) throw ConfigError("sphere dimension must be positive");
  Mat out(count, dim);
  for (std::size_t i = 0; i < count; ++i) sphere_into(out.row(i), dim, rng);
  return out;
}

CheckReport check_sandwich(const SandwichConfig& cfg) {
  if (cfg.instances < 30) throw ConfigError("instances must be at least 30");
  CheckReport report;
  report.pass = true;
  Rng rng(cfg.seed);
  loss::LossConfig lcfg;
  lcfg.duplication = cfg.duplication;
  for (double tau : cfg.taus) {
    lcfg.tau = tau;
    for (std::size_t dim : cfg.dims) {
      std::vector<double> fx(dim), fy(dim);
      for (std::size_t m : cfg.ms) {
        Mat negs(m, dim);
        auto ptrs = row_ptrs(negs);
        double worst = -std::numeric_limits<double>::infinity();
        double sum_asm = 0.0, sum_rsm = 0.0;
        double min_pos = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < cfg.instances; ++t) {
          sphere_into(fx.data(), dim, rng);
          sphere_into(fy.data(), dim, rng);
          for (std::size_t j = 0; j < m; ++j) sphere_into(negs.row(j), dim, rng);
          double a = loss::asm_loss(fx, fy, ptrs, lcfg);
          double r = loss::rsm_loss(fx, ptrs, lcfg);
          double pos = kernels::dot(fx.data(), fy.data(), dim);
          double gap = (1.0 - pos) / tau;
          worst = std::max(worst, r - a);
          worst = std::max(worst, a - (r + gap));
          sum_asm += a;
          sum_rsm += r;
          min_pos = std::min(min_pos, pos);
        }
        // Expectation-level ordering with the loosest per-sample gap.
        const double inv = 1.0 / static_cast<double>(cfg.instances);
        worst = std::max(worst, sum_rsm * inv - sum_asm * inv);
        worst = std::max(worst, sum_asm * inv -
                                    (sum_rsm * inv + (1.0 - min_pos) / tau));
        CheckRow row;
        row.check = "sandwich";
        row.tau = tau;
        row.dim = dim;
        row.lambda = cfg.duplication;
        row.m = m;
        row.estimate = worst;
        row.bound = cfg.slack;
        row.pass = worst <= cfg.slack;
        report.rows.push_back(row);
        report.pass = report.pass && row.pass;
      }
    }
  }
  return report;
}

CheckReport check_limit_decay(const DecayConfig& cfg) {
  if (cfg.trials < 30) throw ConfigError("trials must be at least 30");
  if (cfg.ref_samples == 0) throw ConfigError("ref_samples must be positive");
  require_ascending(cfg.ms);
  CheckReport report;
  report.pass = true;
  Rng rng(cfg.seed);
  const double inv_tau = 1.0 / cfg.tau;

  std::vector<double> a(cfg.dim), b(cfg.dim);
  double sum_z = 0.0, sumsq_z = 0.0;
  for (std::size_t s = 0; s < cfg.ref_samples; ++s) {
    sphere_into(a.data(), cfg.dim, rng);
    sphere_into(b.data(), cfg.dim, rng);
    double z = std::exp(kernels::dot(a.data(), b.data(), cfg.dim) * inv_tau);
    sum_z += z;
    sumsq_z += z * z;
  }
  MeanVar ref = mean_var(sum_z, sumsq_z, cfg.ref_samples);
  const double log_ref = std::log(ref.mean);
  const double se_ref =
      std::sqrt(ref.var / static_cast<double>(cfg.ref_samples)) / ref.mean;

  for (double lambda : cfg.lambdas) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t m : cfg.ms) {
      Mat negs(m, cfg.dim);
      double sum_v = 0.0, sumsq_v = 0.0;
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        sphere_into(a.data(), cfg.dim, rng);  // anchor
        sphere_into(b.data(), cfg.dim, rng);  // positive
        double total =
            lambda *
            std::exp(kernels::dot(a.data(), b.data(), cfg.dim) * inv_tau);
        for (std::size_t j = 0; j < m; ++j) {
          sphere_into(negs.row(j), cfg.dim, rng);
          total += std::exp(kernels::dot(a.data(), negs.row(j), cfg.dim) *
                            inv_tau);
        }
        double v = std::log(total / static_cast<double>(m));
        sum_v += v;
        sumsq_v += v * v;
      }
      MeanVar mv = mean_var(sum_v, sumsq_v, cfg.trials);
      double se_v = std::sqrt(mv.var / static_cast<double>(cfg.trials));
      CheckRow row;
      row.check = "limit_decay";
      row.tau = cfg.tau;
      row.dim = cfg.dim;
      row.lambda = lambda;
      row.m = m;
      row.estimate = std::fabs(mv.mean - log_ref);
      row.std_err = std::sqrt(se_v * se_v + se_ref * se_ref);
      row.bound = lambda / static_cast<double>(m) * std::exp(2.0 * inv_tau) +
                  1.25 * std::pow(static_cast<double>(m), -2.0 / 3.0) *
                      std::exp(inv_tau) *
                      (std::exp(inv_tau) - std::exp(-inv_tau));
      row.decreased = row.estimate < prev;
      row.pass = row.estimate <= row.bound + 3.0 * row.std_err;
      prev = row.estimate;
      report.pass = report.pass && row.pass && row.decreased;
      report.rows.push_back(row);
    }
  }
  return report;
}

CheckReport check_negative_source_gap(const GapConfig& cfg) {
  if (cfg.trials < 30) throw ConfigError("trials must be at least 30");
  require_ascending(cfg.ms);
  CheckReport report;
  report.pass = true;
  Rng rng(cfg.seed);
  const double inv_tau = 1.0 / cfg.tau;
  const double cap = cfg.duplication * std::exp(inv_tau);

  const std::vector<std::size_t>& ms = cfg.ms;
  const std::size_t m_max = ms.back();

  std::vector<double> fx(cfg.dim), n(cfg.dim);
  std::vector<double> sum_ls(ms.size(), 0.0), sumsq_ls(ms.size(), 0.0);
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    sphere_into(fx.data(), cfg.dim, rng);
    double sa = 0.0, sb = 0.0;
    std::size_t next = 0;
    for (std::size_t i = 0; i < m_max; ++i) {
      sphere_into(n.data(), cfg.dim, rng);
      sa += std::exp(kernels::dot(fx.data(), n.data(), cfg.dim) * inv_tau);
      sphere_into(n.data(), cfg.dim, rng);
      sb += std::exp(kernels::dot(fx.data(), n.data(), cfg.dim) * inv_tau);
      while (next < ms.size() && i + 1 == ms[next]) {
        double ls = std::log(cap + sa) - std::log(cap + sb);
        sum_ls[next] += ls;
        sumsq_ls[next] += ls * ls;
        ++next;
      }
    }
  }
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ms.size(); ++k) {
    MeanVar mv = mean_var(sum_ls[k], sumsq_ls[k], cfg.trials);
    CheckRow row;
    row.check = "source_gap";
    row.tau = cfg.tau;
    row.dim = cfg.dim;
    row.lambda = cfg.duplication;
    row.m = ms[k];
    row.estimate = std::fabs(mv.mean);
    row.std_err = std::sqrt(mv.var / static_cast<double>(cfg.trials));
    row.bound = 3.0 * row.std_err;
    row.decreased = row.estimate < prev;
    row.pass = row.estimate <= row.bound;
    prev = row.estimate;
    report.pass = report.pass && row.pass && row.decreased;
    report.rows.push_back(row);
  }

  double worst = 0.0;
  for (std::size_t s = 0; s < cfg.pointwise_samples; ++s) {
    sphere_into(fx.data(), cfg.dim, rng);
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < cfg.pointwise_m; ++i) {
      sphere_into(n.data(), cfg.dim, rng);
      sa += std::exp(kernels::dot(fx.data(), n.data(), cfg.dim) * inv_tau);
      sphere_into(n.data(), cfg.dim, rng);
      sb += std::exp(kernels::dot(fx.data(), n.data(), cfg.dim) * inv_tau);
    }
    worst = std::max(worst,
                     std::fabs(std::log(cap + sa) - std::log(cap + sb)));
  }
  CheckRow pw;
  pw.check = "pointwise";
  pw.tau = cfg.tau;
  pw.dim = cfg.dim;
  pw.lambda = cfg.duplication;
  pw.m = cfg.pointwise_m;
  pw.estimate = worst;
  pw.bound = 2.0 * inv_tau;
  pw.pass = worst < pw.bound;
  report.pass = report.pass && pw.pass;
  report.rows.push_back(pw);
  return report;
}

void write_report_tsv(const std::filesystem::path& path,
                      const CheckReport& report) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open report file: " + path.string());
  os << "check\ttau\tdim\tlambda\tm\testimate\tstd_err\tbound\tdecreased\tpass\n";
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const CheckRow& r : report.rows) {
    os << r.check << '\t' << fmt(r.tau) << '\t' << r.dim << '\t'
       << fmt(r.lambda) << '\t' << r.m << '\t' << fmt(r.estimate) << '\t'
       << fmt(r.std_err) << '\t' << fmt(r.bound) << '\t' << (r.decreased ? 1 : 0)
       << '\t' << (r.pass ? 1 : 0) << '\n';
  }
  if (!os) throw ConfigError("failed writing report file: " + path.string());
}

}  // namespace selfalign::theory
