#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <string>

#include <json.hpp>

#ifndef GRH_CLI_PATH
#define GRH_CLI_PATH "grh"
#endif
#ifndef GRH_SAMPLES_DIR
#define GRH_SAMPLES_DIR "samples"
#endif

namespace {

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(GRH_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    std::string output;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buf.data(), buf.size(), pipe)) output += buf.data();
    int status = pclose(pipe);
    return {WEXITSTATUS(status), output};
}

std::string sample(const std::string& name) {
    return std::string(GRH_SAMPLES_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("cli validate exit codes and output") {
    RunResult ok = run_cli("validate " + sample("pole_pair.json"));
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("VALID") == 0);

    RunResult missing = run_cli("validate /nonexistent.json");
    CHECK(missing.exit_code == 2);
}

TEST_CASE("cli rays lists both directions") {
    RunResult r = run_cli("rays " + sample("pole_pair.json"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("(0)*pi") != std::string::npos);
    CHECK(r.output.find("(1)*pi") != std::string::npos);
}

TEST_CASE("cli solve verdicts") {
    RunResult sum = run_cli("solve " + sample("divergent_direct_sum.json"));
    CHECK(sum.exit_code == 0);
    CHECK(sum.output.find("SOLVABLE (DirectSum)") != std::string::npos);

    RunResult ram = run_cli("solve " + sample("all_ramified.json"));
    CHECK(ram.exit_code == 1);
    CHECK(ram.output.find("no singularity without roots") != std::string::npos);
}

TEST_CASE("cli structured reports re-parse and are deterministic") {
    for (const std::string& args :
         {std::string("validate "), std::string("solve "), std::string("rep ")}) {
        RunResult a = run_cli("--format structured " + args + sample("pole_pair.json"));
        RunResult b = run_cli("--format structured " + args + sample("pole_pair.json"));
        CHECK(a.output == b.output);  // byte-identical across runs
        nlohmann::json doc = nlohmann::json::parse(a.output);
        CHECK(doc.at("schema") == "grh-report/1");
    }
}

TEST_CASE("cli reduce emits the factor triple") {
    RunResult r = run_cli("--format structured reduce " + sample("reduction_example.json"));
    CHECK(r.exit_code == 0);
    nlohmann::json doc = nlohmann::json::parse(r.output);
    CHECK(doc.at("k").size() == 2);
    CHECK(doc.contains("gamma"));
    CHECK(doc.contains("f0"));

    RunResult p = run_cli("reduce " + sample("permutation_example.json") + " --lemma permute");
    CHECK(p.exit_code == 0);
    CHECK(p.output.find("D = diag(2, 0)") != std::string::npos);

    RunResult h = run_cli("reduce " + sample("holoclear_example.json") + " --lemma holoclear");
    CHECK(h.exit_code == 0);
}

TEST_CASE("cli weights actions") {
    RunResult rep = run_cli("weights " + sample("pole_pair.json") + " --report");
    CHECK(rep.exit_code == 0);
    CHECK(rep.output.find("stability:") != std::string::npos);

    RunResult scale = run_cli("--format structured weights " + sample("pole_pair.json") +
                              " --scale 3");
    CHECK(scale.exit_code == 0);
    nlohmann::json doc = nlohmann::json::parse(scale.output);
    CHECK(doc.at("weights").size() == 2);
}

TEST_CASE("cli galois subcommands") {
    RunResult rank = run_cli("galois-rank " + sample("inversion_structure.json"));
    CHECK(rank.exit_code == 0);
    CHECK(rank.output.find("katz rank 1/2") != std::string::npos);
    CHECK(rank.output.find("poincare rank 1") != std::string::npos);

    RunResult report = run_cli("galois-report " + sample("galois_facts.json"));
    CHECK(report.exit_code == 0);
    CHECK(report.output.find("[applies]") != std::string::npos);

    // mu-rule flag is accepted via option and environment alike
    RunResult iter = run_cli("--mu-rule iterative galois-rank " +
                             sample("inversion_structure.json"));
    CHECK(iter.exit_code == 0);
}

TEST_CASE("cli rejects unversioned files") {
    std::string tmp = "/tmp/grh_unversioned.json";
    {
        FILE* f = fopen(tmp.c_str(), "w");
        REQUIRE(f);
        fputs("{\"dimension\": 1}", f);
        fclose(f);
    }
    RunResult r = run_cli("validate " + tmp);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("schema") != std::string::npos);
}
