// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria cover oracle agreement, symmetry, stationarity, the
// identity suite, duplication-matrix exactness, Monte-Carlo agreement, and
// the CLI contract.

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "gkld/check.hpp"
#include "gkld/kld.hpp"
#include "gkld/oracle.hpp"

namespace fs = std::filesystem;
using namespace gkld;
using nlohmann::json;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& label, bool passed,
            const std::string& detail = {}) {
  std::printf("[%s] criterion %d: %s%s%s\n", passed ? "PASS" : "FAIL",
              criterion, label.c_str(), detail.empty() ? "" : " — ",
              detail.c_str());
  if (!passed) ++g_failures;
}

std::vector<GaussianPair> seeded_instances(Index n, int count,
                                           std::uint64_t seed) {
  std::vector<GaussianPair> out;
  out.reserve(count);
  for (int t = 0; t < count; ++t) {
    std::mt19937_64 rng(mix_seed(seed, 1000 * static_cast<std::uint64_t>(n) +
                                           static_cast<std::uint64_t>(t)));
    out.push_back(random_pair(n, rng));
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

// --- criterion 1: Jacobian vs elementwise FD (vec basis) -------------------

void criterion_jacobian_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (Index n : {1, 2, 3, 5, 8}) {
    for (const auto& p : seeded_instances(n, 50, 101)) {
      const JacobianResult jac = assemble_jacobian(p, Basis::Vec);
      const Vector fd =
          fd_gradient(pack(p, Basis::Vec), FdConfig{1e-5, true});
      const double scale = std::max(1.0, jac.assembled.cwiseAbs().maxCoeff());
      worst = std::max(worst,
                       (jac.assembled - fd).cwiseAbs().maxCoeff() / scale);
    }
  }
  const double secs = seconds_since(t0);
  report(1, "Jacobian-oracle agreement", worst <= 1e-6 && secs <= 10.0,
         "max rel err " + sci(worst) + ", " + sci(secs) + " s");
}

// --- criterion 2: vech Hessian vs FD ---------------------------------------

void criterion_hessian_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (Index n : {1, 2, 3, 5, 8}) {
    for (const auto& p : seeded_instances(n, 50, 101)) {
      const HessianResult h = assemble_hessian(p, Basis::Vech);
      const Matrix fd = fd_hessian(pack(p, Basis::Vech), FdConfig{1e-4, true});
      const double scale = std::max(1.0, inf_norm(h.assembled));
      worst = std::max(worst,
                       (h.assembled - fd).cwiseAbs().maxCoeff() / scale);
    }
  }
  const double secs = seconds_since(t0);
  report(2, "Hessian-oracle agreement", worst <= 1e-4 && secs <= 60.0,
         "max rel err " + sci(worst) + ", " + sci(secs) + " s");
}

// --- criterion 3: symmetry and transpose pairings --------------------------

void criterion_symmetry() {
  double worst = 0.0;
  for (Index n : {1, 2, 3, 5, 8}) {
    for (const auto& p : seeded_instances(n, 50, 101)) {
      for (Basis basis : {Basis::Vec, Basis::Vech}) {
        const HessianResult h = assemble_hessian(p, basis);
        const double scale = std::max(1.0, inf_norm(h.assembled));
        worst = std::max(
            worst, (h.assembled - h.assembled.transpose()).cwiseAbs().maxCoeff() /
                       scale);
        for (auto row : kBlockOrder)
          for (auto col : kBlockOrder)
            worst = std::max(worst, (h.block(row, col).transpose() -
                                     h.block(col, row))
                                            .cwiseAbs()
                                            .maxCoeff() /
                                        scale);
      }
    }
  }
  report(3, "Hessian symmetry and block pairings", worst <= 1e-12,
         "max scaled residual " + sci(worst));
}

// --- criterion 4: stationary point -----------------------------------------

void criterion_stationary_point() {
  double worst_grad = 0.0, worst_eig = 0.0;
  for (Index n : {1, 2, 3, 5}) {
    for (auto p : seeded_instances(n, 20, 404)) {
      p.w = p.m;
      p.V = p.S;
      const JacobianResult jac = assemble_jacobian(p, Basis::Vech);
      const double jscale = std::max(1.0, inf_norm(p.V));
      worst_grad = std::max(
          worst_grad, jac.assembled.cwiseAbs().maxCoeff() / jscale);
      const HessianResult h = assemble_hessian(p, Basis::Vech);
      Eigen::SelfAdjointEigenSolver<Matrix> eig(h.assembled);
      const double hnorm =
          std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
      worst_eig = std::max(worst_eig, -eig.eigenvalues().minCoeff() / hnorm);
    }
  }
  report(4, "Stationary point (zero gradient, PSD curvature)",
         worst_grad <= 1e-12 && worst_eig <= 1e-10,
         "grad " + sci(worst_grad) + ", neg curvature " + sci(worst_eig));
}

// --- criterion 5: identity suite plus the vec-FD negative control ----------

void criterion_identity_suite() {
  bool ok = true;
  std::string detail;
  for (const auto& r : identity_suite(2024, {1, 2, 3, 5}, 200)) {
    if (!r.passed) {
      ok = false;
      detail += r.name + " ";
    }
  }

  // negative control: the unconstrained vec FD Hessian does not match the
  // (S, S) representative entrywise, while the D_n compression does
  std::mt19937_64 rng(mix_seed(2024, 999));
  const GaussianPair p = random_pair(2, rng);
  const Matrix fd_vec = fd_hessian(pack(p, Basis::Vec));
  const Matrix fd_ss = fd_vec.block(4, 4, 4, 4);
  const Matrix closed = hessian_block(p, BlockId::S, BlockId::S, Basis::Vec);
  const double scale = std::max(1.0, inf_norm(closed));
  const Matrix d = duplication_matrix(2);
  const bool entrywise_differs =
      (fd_ss - closed).cwiseAbs().maxCoeff() > 1e-2 * scale;
  const bool compressed_matches =
      (d.transpose() * (fd_ss - closed) * d).cwiseAbs().maxCoeff() <=
      1e-4 * scale;
  if (!entrywise_differs) detail += "negative-control-not-separating ";
  if (!compressed_matches) detail += "vech-compression-mismatch ";
  report(5, "Identity suite with vec-FD negative control",
         ok && entrywise_differs && compressed_matches, detail);
}

// --- criterion 6: duplication-matrix exactness ------------------------------

void criterion_duplication_exact() {
  bool ok = true;
  for (Index n = 1; n <= 8; ++n) {
    const Matrix d = duplication_matrix(n);
    std::mt19937_64 rng(mix_seed(606, static_cast<std::uint64_t>(n)));
    for (int t = 0; t < 100; ++t) {
      const Matrix a = random_symmetric(n, rng);
      if ((d * vech(a) - vec(a)).cwiseAbs().maxCoeff() != 0.0) ok = false;
    }
  }
  report(6, "Duplication-matrix exactness D_n vech(A) = vec(A)", ok);
}

// --- criterion 7: Monte-Carlo KLD oracle ------------------------------------

void criterion_mc_kld() {
  bool ok = true;
  std::string detail;
  int idx = 0;
  // 10 seeded instances spread over n = 1, 2, 3
  for (Index n : {1, 2, 3}) {
    const int count = n == 1 ? 4 : 3;
    for (const auto& p : seeded_instances(n, count, 707)) {
      const double closed = kld_value(p);
      auto [est, se] = mc_kld(p, 1000000, mix_seed(707, 77 + idx));
      if (std::abs(est - closed) > 3.0 * se) {
        ok = false;
        detail += "n=" + std::to_string(n) + " off by " +
                  sci((est - closed) / se) + " se ";
      }
      ++idx;
    }
  }
  // closed scalar case
  GaussianPair scalar;
  scalar.n = 1;
  scalar.m = Vector::Zero(1);
  scalar.w = Vector::Zero(1);
  scalar.S = Matrix::Constant(1, 1, 1.0);
  scalar.V = Matrix::Constant(1, 1, 2.0);
  auto [est, se] = mc_kld(scalar, 1000000, 5);
  if (std::abs(est - 0.096573590) > 3.0 * se) {
    ok = false;
    detail += "scalar case off";
  }
  report(7, "Monte-Carlo KLD oracle within 3 standard errors", ok, detail);
}

// --- criterion 8: CLI contract ----------------------------------------------

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd =
      std::string(GKLD_CLI_PATH) + " " + args + " 2>/dev/null";
  std::array<char, 4096> buf{};
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    r.output.append(buf.data(), got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

void criterion_cli_contract() {
  const fs::path dir = fs::temp_directory_path() / "gkld_acceptance_fixtures";
  fs::create_directories(dir);
  auto write = [&](const char* name, const char* text) {
    std::ofstream out(dir / name);
    out << text;
    return (dir / name).string();
  };
  const std::string valid = write("valid.json", R"({
    "n": 2, "m": [0.5, -0.25], "w": [0.0, 0.125],
    "S": [[1.5, 0.25], [0.25, 0.75]], "V": [[2.0, -0.5], [-0.5, 1.25]]})");
  const std::string equal = write("equal.json", R"({
    "n": 2, "m": [0.3, -1.0], "w": [0.3, -1.0],
    "S": [[2.0, 0.5], [0.5, 1.0]], "V": [[2.0, 0.5], [0.5, 1.0]]})");
  const std::string malformed = write("malformed.json", R"({
    "n": 2, "m": [0.0, 0.0], "w": [0.0, 0.0],
    "S": [[1.0, 0.0, 9.0], [0.0, 1.0, 9.0]], "V": [[1.0, 0.0], [0.0, 1.0]]})");
  const std::string non_spd = write("non_spd.json", R"({
    "n": 2, "m": [0.0, 0.0], "w": [0.0, 0.0],
    "S": [[1.0, 0.0], [0.0, 1.0]], "V": [[1.0, 3.0], [3.0, 1.0]]})");

  bool ok = true;
  std::string detail;
  auto expect = [&](const std::string& args, int code, const char* what) {
    const auto r = run_cli(args);
    if (r.exit_code != code) {
      ok = false;
      detail += std::string(what) + " exit " + std::to_string(r.exit_code) +
                " (want " + std::to_string(code) + ") ";
    }
    return r;
  };

  expect("kld " + valid, 0, "kld/valid");
  expect("kld " + malformed, 2, "kld/malformed");
  expect("kld " + non_spd, 3, "kld/non-spd");
  expect("jacobian " + equal + " --block all", 0, "jacobian/equal");
  expect("hessian " + valid + " --basis vech", 0, "hessian/valid");
  expect("check " + equal, 0, "check/equal");
  expect("check " + valid + " --tol-grad 1e-15", 1, "check/impossible-tol");
  const auto id1 = expect("identities --seed 9 --dims 1,2 --trials 25", 0,
                          "identities");
  const auto id2 = run_cli("identities --seed 9 --dims 1,2 --trials 25");
  if (id1.output != id2.output) {
    ok = false;
    detail += "identities-not-deterministic ";
  }
  const auto k1 = run_cli("kld " + valid);
  const auto k2 = run_cli("kld " + valid);
  if (k1.output != k2.output || k1.output.empty()) {
    ok = false;
    detail += "kld-not-deterministic ";
  }
  report(8, "CLI exit-code and determinism contract", ok, detail);
}

}  // namespace

int main() {
  criterion_jacobian_oracle();
  criterion_hessian_oracle();
  criterion_symmetry();
  criterion_stationary_point();
  criterion_identity_suite();
  criterion_duplication_exact();
  criterion_mc_kld();
  criterion_cli_contract();
  if (g_failures > 0) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
