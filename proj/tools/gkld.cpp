// gkld: value, Jacobian, and Hessian of the KL divergence between two
// multivariate Gaussians, plus the finite-difference and identity
// verification suites. See FORMAT.md for the instance and output schemas.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gkld/check.hpp"
#include "gkld/io.hpp"
#include "gkld/kld.hpp"
#include "gkld/oracle.hpp"

namespace {

using namespace gkld;

constexpr int kExitCheckFailed = 1;
constexpr int kExitParseError = 2;
constexpr int kExitInvalidInstance = 3;

struct CommonOpts {
  std::string output;
  std::string format = "json";
};

void emit(const json& doc, const CommonOpts& opts) {
  const std::string text = doc.dump(2) + "\n";
  if (opts.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(opts.output);
    if (!out) throw std::runtime_error("cannot open output file: " + opts.output);
    out << text;
  }
}

std::optional<BlockId> parse_block_char(char c) {
  switch (c) {
    case 'm': return BlockId::M;
    case 'w': return BlockId::W;
    case 'S': case 's': return BlockId::S;
    case 'V': case 'v': return BlockId::V;
    default: return std::nullopt;
  }
}

const char* block_name(BlockId b) {
  switch (b) {
    case BlockId::M: return "m";
    case BlockId::W: return "w";
    case BlockId::S: return "S";
    case BlockId::V: return "V";
  }
  return "?";
}

Basis parse_basis(const std::string& s) {
  if (s == "vec") return Basis::Vec;
  if (s == "vech") return Basis::Vech;
  throw CLI::ValidationError("--basis must be vec or vech");
}

json reports_payload(const std::vector<CheckReport>& reports) {
  json arr = json::array();
  bool all = true;
  for (const auto& r : reports) {
    arr.push_back(to_json(r));
    all = all && r.passed;
  }
  return json{{"reports", arr}, {"all_passed", all}};
}

int run_kld(const std::string& path, const CommonOpts& opts) {
  const Instance inst = load_instance(path);
  const double value = kld_value(inst.pair);
  emit(output_document("kld", inst.name, json{{"value", value}}), opts);
  return 0;
}

int run_jacobian(const std::string& path, const std::string& basis_str,
                 const std::string& block, const CommonOpts& opts) {
  const Instance inst = load_instance(path);
  const Basis basis = parse_basis(basis_str);
  json payload{{"basis", basis_name(basis)}};
  if (block == "all") {
    const JacobianResult r = assemble_jacobian(inst.pair, basis);
    payload["blocks"] = json{{"m", to_json(r.block_m)},
                             {"w", to_json(r.block_w)},
                             {"S", to_json(r.block_S)},
                             {"V", to_json(r.block_V)}};
    payload["assembled"] = to_json(r.assembled);
  } else {
    if (block.size() != 1 || !parse_block_char(block[0]))
      throw CLI::ValidationError("--block must be one of m|w|S|V|all");
    const BlockId id = *parse_block_char(block[0]);
    payload["block"] = block_name(id);
    payload["values"] = to_json(jacobian_block(inst.pair, id, basis));
  }
  emit(output_document("jacobian", inst.name, payload,
                       json{{"basis", basis_name(basis)}, {"block", block}}),
       opts);
  return 0;
}

int run_hessian(const std::string& path, const std::string& basis_str,
                const std::string& block, const CommonOpts& opts) {
  const Instance inst = load_instance(path);
  const Basis basis = parse_basis(basis_str);
  const HessianResult r = assemble_hessian(inst.pair, basis);
  const double residual =
      (r.assembled - r.assembled.transpose()).cwiseAbs().maxCoeff();
  json payload{{"basis", basis_name(basis)},
               {"symmetry_residual", residual}};
  if (block == "all") {
    json blocks = json::object();
    for (auto row : kBlockOrder)
      for (auto col : kBlockOrder)
        blocks[std::string(block_name(row)) + block_name(col)] =
            to_json(r.block(row, col));
    payload["blocks"] = blocks;
    payload["assembled"] = to_json(r.assembled);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(
        0.5 * (r.assembled + r.assembled.transpose()));
    payload["min_eigenvalue"] = eig.eigenvalues().minCoeff();
  } else {
    auto rb = block.size() == 2 ? parse_block_char(block[0]) : std::nullopt;
    auto cb = block.size() == 2 ? parse_block_char(block[1]) : std::nullopt;
    if (!rb || !cb)
      throw CLI::ValidationError(
          "--block must be a pair like mm, mV, SS, Vw, or all");
    payload["block"] = std::string(block_name(*rb)) + block_name(*cb);
    payload["values"] = to_json(r.block(*rb, *cb));
  }
  emit(output_document("hessian", inst.name, payload,
                       json{{"basis", basis_name(basis)}, {"block", block}}),
       opts);
  return 0;
}

int run_check(const std::string& path, Index random_n, std::uint64_t seed,
              int trials, double tol_grad, double tol_hess,
              const CommonOpts& opts) {
  std::vector<CheckReport> reports;
  std::string name;
  if (!path.empty()) {
    const Instance inst = load_instance(path);
    name = inst.name;
    reports = instance_checks(inst.pair, tol_grad, tol_hess);
  } else if (random_n > 0) {
    name = "random(n=" + std::to_string(random_n) + ")";
    for (int t = 0; t < trials; ++t) {
      std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
      const GaussianPair p = random_pair(random_n, rng);
      for (auto r : instance_checks(p, tol_grad, tol_hess)) {
        r.name = "trial" + std::to_string(t) + "/" + r.name;
        reports.push_back(std::move(r));
      }
    }
  } else {
    throw CLI::ValidationError("check needs an instance file or --random N");
  }
  const json payload = reports_payload(reports);
  emit(output_document("check", name, payload,
                       json{{"seed", seed},
                            {"trials", trials},
                            {"tol_grad", tol_grad},
                            {"tol_hess", tol_hess}}),
       opts);
  return payload["all_passed"].get<bool>() ? 0 : kExitCheckFailed;
}

int run_identities(std::uint64_t seed, const std::string& dims_str, int trials,
                   const CommonOpts& opts) {
  std::vector<Index> dims;
  std::stringstream ss(dims_str);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) dims.push_back(std::stol(tok));
  if (dims.empty())
    throw CLI::ValidationError("--dims must be a comma list like 1,2,3");
  const auto reports = identity_suite(seed, dims, trials);
  const json payload = reports_payload(reports);
  emit(output_document("identities", "", payload,
                       json{{"seed", seed},
                            {"dims", dims_str},
                            {"trials", trials}}),
       opts);
  return payload["all_passed"].get<bool>() ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KL divergence between multivariate Gaussians: closed-form "
               "value, Jacobian, Hessian, and numerical verification"};
  app.require_subcommand(1);
  app.fallthrough();  // --output/--format may follow the subcommand

  CommonOpts opts;
  app.add_option("--output", opts.output, "Write the output document here");
  app.add_option("--format", opts.format, "Output format (json)")
      ->check(CLI::IsMember({"json"}));

  std::string path, basis = "vech", block = "all", dims = "1,2,3";
  Index random_n = 0;
  std::uint64_t seed = 42;
  int trials = 10;
  double tol_grad = 1e-6, tol_hess = 1e-4;

  auto* kld = app.add_subcommand("kld", "Closed-form KLD value");
  kld->add_option("instance", path, "Instance file")->required();

  auto* jac = app.add_subcommand("jacobian", "Jacobian blocks");
  jac->add_option("instance", path, "Instance file")->required();
  jac->add_option("--basis", basis, "vec or vech (default vech)");
  jac->add_option("--block", block, "m|w|S|V|all");

  auto* hess = app.add_subcommand("hessian", "Hessian blocks");
  hess->add_option("instance", path, "Instance file")->required();
  hess->add_option("--basis", basis, "vec or vech (default vech)");
  hess->add_option("--block", block, "block pair (e.g. mm, mV, SS) or all");

  auto* check = app.add_subcommand("check", "Verify closed forms against FD");
  check->add_option("instance", path, "Instance file");
  check->add_option("--random", random_n, "Check random instances of this n");
  check->add_option("--seed", seed, "Master seed");
  check->add_option("--trials", trials, "Random trials");
  check->add_option("--tol-grad", tol_grad, "Jacobian-vs-FD tolerance");
  check->add_option("--tol-hess", tol_hess, "Hessian-vs-FD tolerance");

  auto* ident = app.add_subcommand("identities", "Randomized identity suite");
  ident->add_option("--seed", seed, "Master seed");
  ident->add_option("--dims", dims, "Comma-separated dimensions");
  ident->add_option("--trials", trials, "Trials per identity per dim");

  CLI11_PARSE(app, argc, argv);

  try {
    if (kld->parsed()) return run_kld(path, opts);
    if (jac->parsed()) return run_jacobian(path, basis, block, opts);
    if (hess->parsed()) return run_hessian(path, basis, block, opts);
    if (check->parsed())
      return run_check(path, random_n, seed, trials, tol_grad, tol_hess, opts);
    if (ident->parsed()) return run_identities(seed, dims, trials, opts);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const NotPositiveDefiniteError& e) {
    std::cerr << "invalid instance: " << e.what() << "\n";
    return kExitInvalidInstance;
  } catch (const NotSymmetricError& e) {
    std::cerr << "invalid instance: " << e.what() << "\n";
    return kExitInvalidInstance;
  } catch (const NonFiniteError& e) {
    std::cerr << "invalid instance: " << e.what() << "\n";
    return kExitInvalidInstance;
  } catch (const DimensionMismatchError& e) {
    std::cerr << "invalid instance: " << e.what() << "\n";
    return kExitInvalidInstance;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInstance;
  }
  return 0;
}
