// monovi: batch driver.
//
//   monovi run <config.json> [--seed N] [--threads N] [--output-dir DIR]
//   monovi selftest
//
// Exit codes: 0 ok, 2 config error, 3 solver failure, 4 certificate,
// bracket or probe failure, 1 selftest failure or usage error.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "monovi/detail/parallel.hpp"
#include "monovi/run.hpp"
#include "monovi/selftest.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Extremal solutions of elliptic inclusions with discontinuous nonlinearities"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string output_dir;
  std::string fault;
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--threads", threads, "worker threads (default: MONOVI_THREADS or 1)");
  auto* out_opt = app.add_option("--output-dir", output_dir, "artifact directory (overrides the config)");
  app.add_option("--inject-fault", fault, "test-only fault injection")->group("")->check(CLI::IsMember({"flip-apply-a-sign"}));

  auto* run_cmd = app.add_subcommand("run", "solve a configured problem and write artifacts");
  std::string config_path;
  run_cmd->add_option("config", config_path, "JSON config file")->required();
  auto* self_cmd = app.add_subcommand("selftest", "run the embedded invariant suites");

  CLI11_PARSE(app, argc, argv);
  monovi::set_thread_count(threads);

  if (*run_cmd) {
    monovi::RunOptions opt;
    if (*seed_opt) opt.seed = seed;
    if (*out_opt) opt.output_dir = output_dir;
    const auto res = monovi::run_file(config_path, opt);
    if (res.exit_code != monovi::exit_ok) {
      nlohmann::json diag{{"status", "error"}, {"exit_code", res.exit_code}, {"kind", res.error_kind}, {"message", res.message}};
      std::cerr << diag.dump() << '\n';
    } else {
      std::cout << "ok: " << res.output_dir.string() << "/summary.json\n";
    }
    return res.exit_code;
  }

  if (*self_cmd) {
    monovi::SelftestOptions opt;
    if (*seed_opt) opt.seed = seed;
    opt.flip_apply_a_sign = fault == "flip-apply-a-sign";
    const auto results = monovi::selftest(opt);
    bool ok = true;
    for (const auto& s : results) {
      std::cout << (s.passed ? "PASS " : "FAIL ") << s.name << "  " << s.detail << '\n';
      ok = ok && s.passed;
    }
    if (!ok) {
      std::cout << "failing:";
      for (const auto& s : results) {
        if (!s.passed) std::cout << ' ' << s.name;
      }
      std::cout << '\n';
    }
    return ok ? 0 : 1;
  }
  return 1;
}
