#include <doctest.h>

#include <fstream>
#include <sstream>

#include "runner.hpp"

using namespace birkhoff;
using namespace birkhoff::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string &name) : path(fs::temp_directory_path() / name)
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write(const fs::path &p, const std::string &text)
{
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char *delta_config = R"({
  "actions": [
    {"type": "experiment", "kind": "delta",
     "params": {"k": 1, "l": 2, "n": 1, "integrator": {"tol": 1e-12}}}
  ]
})";

} // namespace

TEST_CASE("sha256 digest")
{
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("line lookup of key paths")
{
    const std::string text = "{\n  \"models\": {\n    \"b\": {\n      \"family\": \"A3\"\n    }\n  },\n  \"actions\": []\n}\n";
    CHECK(locate_line(text, "models.b.family") == 4);
    CHECK(locate_line(text, "actions[0].model") == std::nullopt);
    CHECK(locate_line(text, "actions") == 7);
}

TEST_CASE("single delta experiment writes manifest, report and trajectory")
{
    TempDir tmp("birkhoff_cli_delta");
    const auto cfg = write(tmp.path / "delta.json", delta_config);
    RunSettings st;
    st.out = tmp.path / "out";
    const auto r = run(load_run_config(cfg), st);
    CHECK(r.exit_code == 0);
    REQUIRE(r.actions.size() == 1);
    CHECK(r.actions[0].status == "pass");
    const auto dir = tmp.path / "out" / "01-delta";
    CHECK(fs::exists(tmp.path / "out" / "manifest.json"));
    const auto report = json::parse(slurp(dir / "report.json"));
    CHECK(report["pass"] == true);
    CHECK(recheck_report(report));
    const auto csv = slurp(dir / "trajectory.csv");
    CHECK(csv.substr(0, csv.find('\n')) == "t,x1,y1,x2,y2,H,I1,I2");
    CHECK(slurp(dir / "radius.gp").find("trajectory.csv") != std::string::npos);

    const auto manifest = json::parse(slurp(tmp.path / "out" / "manifest.json"));
    CHECK(manifest["status"] == "pass");
    REQUIRE(manifest["artifacts"].size() == 3);
    for (const auto &a : manifest["artifacts"])
        CHECK(a["sha256"] == sha256_hex(slurp(tmp.path / "out" / a["path"].get<std::string>())));
    CHECK(manifest["inputs"][0]["path"] == "delta.json");
    CHECK(manifest["inputs"][0]["sha256"] == sha256_hex(delta_config));
}

TEST_CASE("identical inputs give byte-identical artifacts")
{
    TempDir tmp("birkhoff_cli_determinism");
    write(tmp.path / "profiles" / "p.json", R"({"scale_profile": {"name": "p", "action_level": 0.001}})");
    const auto cfg = write(tmp.path / "run.json", R"({
      "backend": "exact",
      "models": {
        "b": {"family": "B", "omega": {"values": ["1", "-21/10"]}, "sequence": {"mode": "B"}, "order": 6},
        "s": {"family": "saddle-2dof", "omega": {"values": ["1", "-21/10"]},
              "coupling": {"a": "1", "k": 2, "l": 1}, "order": 4}
      },
      "actions": [
        {"type": "normalize", "model": "b", "order": 4, "shuffle_check": true},
        {"type": "coefficients", "model": "s", "order": 2, "closed_form": {"kind": "order2-pattern"}},
        {"type": "experiment", "kind": "delta", "params": {"k": 2, "l": 1, "n": 1}}
      ],
      "seed": 11
    })");
    RunSettings a, b;
    a.out = tmp.path / "a";
    b.out = tmp.path / "b";
    b.parallel = true;
    const auto ra = run(load_run_config(cfg), a);
    const auto rb = run(load_run_config(cfg), b);
    CHECK(ra.exit_code == 0);
    CHECK(rb.exit_code == 0);
    CHECK(slurp(tmp.path / "a" / "manifest.json") == slurp(tmp.path / "b" / "manifest.json"));
    REQUIRE(ra.artifacts.size() == rb.artifacts.size());
    for (std::size_t i = 0; i < ra.artifacts.size(); ++i) {
        CHECK(ra.artifacts[i].path == rb.artifacts[i].path);
        CHECK(ra.artifacts[i].sha256 == rb.artifacts[i].sha256);
    }
    const auto table = slurp(tmp.path / "a" / "02-coefficients" / "coefficients.csv");
    CHECK(table.find("quantity,index,measured,predicted,difference,compare") == 0);
    CHECK(table.find("coefficient,1 1,40/1,40/1,0,exact") != std::string::npos);
    CHECK(table.find("coefficient,2 0,10/1,10/1,0,exact") != std::string::npos);
}

TEST_CASE("validation failures name the key and write nothing")
{
    TempDir tmp("birkhoff_cli_invalid");
    auto expect_invalid = [&](const std::string &text, const std::string &where, std::optional<int> line = std::nullopt) {
        const auto cfg = write(tmp.path / "bad.json", text);
        RunSettings st;
        st.out = tmp.path / "out";
        try {
            run(load_run_config(cfg), st);
            FAIL("accepted: " << text);
        } catch (const ValidationError &e) {
            CHECK(e.where() == where);
            if (line) CHECK(e.line() == line);
        }
        CHECK(!fs::exists(tmp.path / "out"));
    };
    expect_invalid("{\n \"models\": {\"m\": {\n  \"family\": \"A3\",\n  \"omega\": {\"values\": [1, -2.1]}}},\n"
                   " \"actions\": [{\"type\": \"normalize\", \"model\": \"m\"}]}",
                   "models.m", 2);
    expect_invalid(R"({"actions": [{"type": "normalize", "model": "nope"}]})", "actions[0].model");
    expect_invalid(R"({"actions": [{"type": "frobnicate"}]})", "actions[0].type");
    expect_invalid(R"({"actions": []})", "actions");
    expect_invalid(R"({"backend": "float", "precision_bits": 64, "actions": [{"type": "experiment", "kind": "delta"}]})",
                   "precision_bits");
    expect_invalid(R"({"output": {"formats": ["plot-script"]}, "actions": [{"type": "experiment", "kind": "delta"}]})",
                   "output.formats");
    expect_invalid(R"({"actions": [{"type": "experiment", "kind": "delta", "params": {"k": 1, "l": 2, "tol": 1}}]})",
                   "actions[0].params.tol");
    expect_invalid(R"({"actions": [{"type": "experiment", "kind": "resonant-escape",
                      "params": {"omega": {"values": [2, -1]}, "k": 1, "l": 2, "a": "1/10"}}]})",
                   "actions[0].params.omega.lattice");
    expect_invalid(R"({"models": {"b": {"family": "B", "omega": {"values": [1, -2.1]}, "sequence": {"mode": "B"}}},
                      "actions": [{"type": "divergence-probe", "model": "b", "gap_law": "exp-n2"}]})",
                   "actions[0].gap_law");
}

TEST_CASE("failing verdicts give exit code 1 and are recorded")
{
    TempDir tmp("birkhoff_cli_fail");
    const auto cfg = write(tmp.path / "tight.json", R"({
      "actions": [{"type": "experiment", "kind": "delta",
                   "params": {"k": 1, "l": 2, "n": 1, "deviation_tol": 1e-300}}]
    })");
    RunSettings st;
    st.out = tmp.path / "out";
    const auto r = run(load_run_config(cfg), st);
    CHECK(r.exit_code == 1);
    CHECK(r.actions[0].status == "fail");
    const auto manifest = json::parse(slurp(tmp.path / "out" / "manifest.json"));
    CHECK(manifest["status"] == "fail");
    bool named = false;
    for (const auto &v : manifest["actions"][0]["verdicts"])
        if (v["pass"] == false) named = v["name"] == "transverse deviation / r";
    CHECK(named);
    // the stored numbers reproduce the stored verdict
    CHECK(recheck_report(json::parse(slurp(tmp.path / "out" / "01-delta" / "report.json"))));
}

TEST_CASE("runtime errors are reported per action")
{
    TempDir tmp("birkhoff_cli_error");
    // resonant quadratic part: normalization must refuse it
    const auto cfg = write(tmp.path / "res.json", R"({
      "models": {"r": {"family": "resonant-2dof", "omega": {"values": [2, -1], "lattice": [[1, 2]]},
                       "coupling": {"a": 1}, "order": 4}},
      "actions": [{"type": "normalize", "model": "r", "order": 2},
                  {"type": "experiment", "kind": "delta", "params": {"k": 1, "l": 2, "n": 1}}]
    })");
    RunSettings st;
    st.out = tmp.path / "out";
    const auto r = run(load_run_config(cfg), st);
    CHECK(r.exit_code == 1);
    CHECK(r.actions[0].status == "error");
    CHECK(r.actions[0].error.find("resonant") != std::string::npos);
    CHECK(r.actions[1].status == "pass");
}

TEST_CASE("included profiles and the profile override")
{
    TempDir tmp("birkhoff_cli_profile");
    write(tmp.path / "profiles" / "desk.json", R"({"scale_profile": {"name": "desk", "action_level": 0.001}})");
    write(tmp.path / "other.json", R"({"scale_profile": {"name": "other", "action_level": 0.002}})");
    const auto cfg = write(tmp.path / "seq.json", R"({
      "backend": "float",
      "models": {"a": {"family": "A3", "omega": {"values": ["1", "-1.999999999999", "0.7"]},
                       "sequence": {"include": "profiles/desk.json", "mode": "L", "first_index": 1},
                       "order": 5}},
      "actions": [{"type": "sequence", "model": "a"}]
    })");
    RunSettings st;
    st.out = tmp.path / "out";
    run(load_run_config(cfg), st);
    auto seq = json::parse(slurp(tmp.path / "out" / "01-sequence" / "sequence.json"));
    CHECK(seq["scale_profile"]["name"] == "desk");
    const auto manifest = json::parse(slurp(tmp.path / "out" / "manifest.json"));
    REQUIRE(manifest["inputs"].size() == 2);
    CHECK(manifest["inputs"][1]["path"] == "profiles/desk.json");

    st.profile = tmp.path / "other.json";
    run(load_run_config(cfg), st);
    seq = json::parse(slurp(tmp.path / "out" / "01-sequence" / "sequence.json"));
    CHECK(seq["scale_profile"]["name"] == "other");
    CHECK(seq["scale_profile"]["action_level"] == doctest::Approx(0.002));
}

TEST_CASE("model files and output root")
{
    TempDir tmp("birkhoff_cli_model");
    const auto model = write(tmp.path / "b.json", R"({"family": "B", "omega": {"values": ["1", "-21/10"]},
                                                      "sequence": {"mode": "B"}, "order": 6})");
    auto input = load_model_file(model);
    input.config["actions"] = json::array({json{{"type", "coefficients"},
                                                {"model", "model"},
                                                {"order", 3},
                                                {"closed_form", json{{"kind", "gamma"}, {"entry", 0}}},
                                                {"zeta", json::array({"0", "1/4", "1/2", "3/4", "1"})}}});
    ::setenv("BIRKHOFF_OUT", (tmp.path / "root").c_str(), 1);
    CHECK(default_output_root() == tmp.path / "root");
    const auto r = run(input, {});
    ::unsetenv("BIRKHOFF_OUT");
    CHECK(r.exit_code == 0);
    CHECK(r.out_dir == tmp.path / "root" / "b");
    const auto report = json::parse(slurp(r.out_dir / "01-coefficients" / "report.json"));
    CHECK(report["measured"]["quadratic"] == "40/1");
    CHECK(report["predicted"]["gamma"] == "-40/1");
    CHECK(report["measured"]["interpolation_residual"] == 0.0);

    auto bad = load_model_file(write(tmp.path / "bad.json", "{\n  \"family\": \"B\",\n  \"omega\": {\"values\": [1, 2, 3]}\n}"));
    bad.config["actions"] = json::array({json{{"type", "normalize"}, {"model", "model"}}});
    RunSettings st;
    st.out = tmp.path / "never";
    try {
        run(bad, st);
        FAIL("accepted");
    } catch (const ValidationError &e) {
        CHECK(e.file() == "bad.json");
        CHECK(e.where().rfind("models.model", 0) == 0);
    }
    CHECK(!fs::exists(tmp.path / "never"));
}
