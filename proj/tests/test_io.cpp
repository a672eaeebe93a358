// Copyright 2026 The nmqt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <nmqt/io.hpp>

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace nmqt;

namespace {

template <class F>
std::pair<ErrorKind, std::string> error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return {e.kind(), e.what()};
  }
  FAIL("expected an nmqt::Error");
  return {ErrorKind::Validation, ""};
}

bool contains(const std::string& s, const std::string& sub) { return s.find(sub) != std::string::npos; }

std::filesystem::path scratch_dir() {
  const auto p = std::filesystem::temp_directory_path() / "nmqt_test_io";
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config: minimal fidelity config takes the documented defaults") {
  const ExperimentConfig c = parse_config_text("study: fidelity\n");
  CHECK(c.study == Study::Fidelity);
  CHECK(c.teleport.r == 0.346);
  CHECK(c.channel_model == "lorentzian");
  REQUIRE(c.channel.ancillas.size() == 1);
  CHECK(c.channel.ancillas[0].gamma == 0.8);
  CHECK(c.channel.ancillas[0].kappa == 4.0);
  CHECK(c.channel.omega_b == 10.0);
  CHECK(c.teleport.input.label() == "coherent");
  CHECK(c.teleport.times.n_steps() == 1000);
  CHECK(c.reference);
  CHECK(c.config_hash.size() == 16);
}

TEST_CASE("config: cat inputs default to the stronger resource") {
  const ExperimentConfig c = parse_config_text("study: wigner\n");
  CHECK(c.teleport.input.label() == "odd_cat");
  CHECK(c.teleport.r == 0.4);
  const ExperimentConfig d = parse_config_text("study: fidelity\ninput: {kind: cat, alpha: 1, theta: 0.5}\nresource: {r: 0.5}\n");
  CHECK(d.teleport.input.label() == "cat");
  CHECK(d.teleport.r == 0.5);
}

TEST_CASE("config: unknown study lists the valid ones") {
  const auto [k, msg] = error_of([] { parse_config_text("study: fidelty\n"); });
  CHECK(k == ErrorKind::Validation);
  for (const auto& [name, s] : study_names()) CHECK(contains(msg, name));
}

TEST_CASE("config: negative gamma0 is reported at its path") {
  const auto [k, msg] = error_of([] { parse_config_text("study: fidelity\nchannel: {gamma0: -1}\n"); });
  CHECK(k == ErrorKind::Validation);
  CHECK(contains(msg, "channel.gamma0"));
}

TEST_CASE("config: every error is reported at once") {
  const auto [k, msg] = error_of([] {
    parse_config_text("study: fidelity\nchannel: {gamma0: -1, bogus: 2}\nresource: {r: -0.1}\ntime: {n_steps: 0}\n");
  });
  CHECK(k == ErrorKind::Validation);
  CHECK(contains(msg, "channel.gamma0"));
  CHECK(contains(msg, "channel.bogus"));
  CHECK(contains(msg, "resource.r"));
  CHECK(contains(msg, "time"));
}

TEST_CASE("config: truncation is checked before computation") {
  const auto [k, msg] = error_of([] { parse_config_text("study: fidelity\nchannel: {mode_dim: 4}\ninput: {alpha: 3}\n"); });
  CHECK(k == ErrorKind::Validation);
  CHECK(contains(msg, "input"));
}

TEST_CASE("config: study-specific requirements") {
  CHECK(error_of([] { parse_config_text("study: blp_surface\n"); }).first == ErrorKind::Validation);
  CHECK(error_of([] { parse_config_text("study: psd\nchannel: {model: markovian}\n"); }).first == ErrorKind::Validation);
  CHECK(error_of([] { parse_config_text("study: wigner\nwigner: {times: [200]}\n"); }).first == ErrorKind::Validation);
  const ExperimentConfig c = parse_config_text("study: blp_surface\nblp: {gamma0: {from: 0.5, to: 2, count: 4}, kappa0: 1}\n");
  CHECK(c.blp_gamma0.size() == 4);
  CHECK(c.blp_gamma0.back() == 2.0);
  CHECK(c.blp_kappa0 == std::vector<double>{1.0});
}

TEST_CASE("config: missing file and malformed YAML") {
  CHECK(error_of([] { parse_config("/nonexistent/nmqt.yaml"); }).first == ErrorKind::MissingFile);
  CHECK(error_of([] { parse_config_text("study: [fidelity\n"); }).first == ErrorKind::Parse);
  CHECK(error_of([] { parse_config_text("- 1\n- 2\n"); }).first == ErrorKind::Parse);
}

TEST_CASE("csv: round trip keeps provenance and values") {
  ResultTable t({"t", "value"});
  t.annotate("artifact", kArtifactVersion);
  t.annotate("note", "a: b");
  t.add_row({0.0, 1.0 / 3.0});
  t.add_row({0.1, -2.5e-7});
  const auto path = (scratch_dir() / "sub" / "round.csv").string();
  write_csv(t, path);
  const ResultTable r = read_csv(path);
  CHECK(r.columns() == t.columns());
  CHECK(r.provenance() == t.provenance());
  REQUIRE(r.rows().size() == 2);
  CHECK(std::abs(r.rows()[0][1] - 1.0 / 3.0) < 1e-12);
  CHECK(r.rows()[1][1] == -2.5e-7);
  CHECK(error_of([&] { t.add_row({1.0}); }).first == ErrorKind::Shape);
  CHECK(error_of([&] { (void)t.column("missing"); }).first == ErrorKind::Index);
}

TEST_CASE("csv: empty table and unwritable path") {
  ResultTable t({"a"});
  const auto path = (scratch_dir() / "empty.csv").string();
  write_csv(t, path);
  CHECK(read_csv(path).rows().empty());
  std::ofstream(scratch_dir() / "blocker") << "x";
  CHECK(error_of([&] { write_csv(t, (scratch_dir() / "blocker" / "x.csv").string()); }).first == ErrorKind::Io);
  CHECK(error_of([] { read_csv("/nonexistent/x.csv"); }).first != ErrorKind::Validation);
}

TEST_CASE("run_study: each study produces its columns") {
  const std::string small = "channel: {mode_dim: 5, ancilla_dim: 3}\ntime: {t_end: 1, n_steps: 5}\n";
  SECTION("entanglement") {
    const ResultTable t = run_study(parse_config_text("study: entanglement\n" + small));
    CHECK(t.rows().size() == 6);
    CHECK(t.columns()[2] == "log_negativity_markov");
    CHECK(t.column("log_negativity")[0] > 0.9);
  }
  SECTION("fidelity") {
    const ResultTable t = run_study(parse_config_text("study: fidelity\ninput: {alpha: 0.5}\n" + small));
    CHECK(t.column("relative_fidelity")[0] == 1.0);
    CHECK(t.column("fidelity_markov").size() == 6);
  }
  SECTION("blp_surface") {
    const ResultTable t = run_study(parse_config_text("study: blp_surface\nblp: {gamma0: [0.5, 1], kappa0: 1}\n" + small));
    CHECK(t.rows().size() == 2);
    CHECK(t.column("blp")[0] >= 0.0);
  }
  SECTION("wigner") {
    const ResultTable t = run_study(parse_config_text(
        "study: wigner\ninput: {kind: odd_cat, alpha: 0.6}\nwigner: {times: [0, 1], points: 5}\n" + small));
    CHECK(t.rows().size() == 2 * 2 * 25);
  }
  SECTION("compare_inputs") {
    const ResultTable t = run_study(parse_config_text("study: compare_inputs\ncompare_inputs: {alpha: 0.5, r_s: 0.3}\n" + small));
    CHECK(t.columns().size() == 9);
    for (const char* c : {"relative_fidelity_coherent", "relative_fidelity_squeezed", "relative_fidelity_even_cat",
                          "relative_fidelity_odd_cat"})
      CHECK(t.column(c)[0] == 1.0);
  }
  SECTION("psd") {
    const ResultTable t = run_study(parse_config_text(
        "study: psd\nchannel: {model: two_lorentzian, terms: [{omega: 5, gamma: 1, kappa: 1}, {omega: 15, gamma: 1, "
        "kappa: 1}]}\npsd: {points: 21}\n"));
    CHECK(t.rows().size() == 21);
    CHECK(std::abs(t.column("psd")[5] - (1.0 + t.column("psd_2")[5])) < 1e-12);
  }
}

TEST_CASE("run_study: identical configs give byte-identical CSV") {
  const std::string text = "study: fidelity\nchannel: {mode_dim: 5, ancilla_dim: 3}\ntime: {t_end: 1, n_steps: 4}\n"
                           "metadata: {run: check}\n";
  const std::string a = to_csv(run_study(parse_config_text(text)));
  const std::string b = to_csv(run_study(parse_config_text(text)));
  CHECK(a == b);
  CHECK(contains(a, "# meta.run: check"));
  CHECK(contains(a, "# config_hash: "));
}
