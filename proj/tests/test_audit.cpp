#include <gtest/gtest.h>

#include <string>

#include "sbmoo/audit.hpp"
#include "sbmoo/detection.hpp"

using namespace sbmoo;

namespace {

AuditConfig small_config(std::size_t budget = 30, std::size_t pop = 10) {
    AuditConfig cfg;
    cfg.problem = "f1";
    cfg.d = 2;
    cfg.budget = budget;
    cfg.pop = pop;
    return cfg;
}

std::string child(const std::string& mode, long arg = 0) {
    return std::string(FAKE_OPTIMISER) + " " + mode + " " + std::to_string(arg);
}

}  // namespace

TEST(AuditSession, InitMessageLayout) {
    AuditSession s(small_config());
    EXPECT_EQ(s.init_message(), R"({"type":"init","problem":"f1","d":2,"budget":30,"pop":10})");
}

TEST(AuditSession, EvalRepliesAndBudget) {
    AuditSession s(small_config(2, 1));
    const auto r1 = nlohmann::json::parse(s.handle(R"({"type":"eval","x":[0.5,0.5]})"));
    EXPECT_EQ(r1["type"], "objectives");
    EXPECT_EQ(r1["remaining"], 1);
    EXPECT_EQ(r1["f"].size(), 2u);
    s.handle(R"({"type":"eval","x":[0.25,0.5]})");
    EXPECT_EQ(s.handle(R"({"type":"eval","x":[0.1,0.1]})"), R"({"type":"budget_exhausted"})");
    EXPECT_EQ(s.evaluations(), 2u);
    EXPECT_EQ(s.handle(R"({"type":"final_population","X":[[0.25,0.5]]})"), R"({"type":"done"})");
    EXPECT_EQ(s.state(), AuditSession::State::Finished);
    const auto t = s.trace();
    EXPECT_TRUE(t.complete);
    EXPECT_NO_THROW(validate_trace(t));
}

TEST(AuditSession, ObjectivesMatchBuiltInHarnessStream) {
    auto cfg = small_config(3, 1);
    cfg.run_index = 4;
    cfg.master_seed = 9;
    AuditSession s(cfg);
    BudgetedEvaluator ref(ProblemSpec::from_id("f1", 2), 3, RngStream(run_seed(9, "f1", 2, 4), streams::kObjectives));
    const std::vector<double> x{0.5, 0.5};
    for (int i = 0; i < 3; ++i) {
        const auto r = nlohmann::json::parse(s.handle(R"({"type":"eval","x":[0.5,0.5]})"));
        const auto f = ref(x);
        EXPECT_EQ(r["f"][0].get<double>(), f.g1);
        EXPECT_EQ(r["f"][1].get<double>(), f.g2);
    }
}

TEST(AuditSession, ProtocolViolations) {
    auto expect_violation = [](const std::string& msg) {
        AuditSession s(small_config());
        EXPECT_THROW(s.handle(msg), ProtocolError) << msg;
    };
    expect_violation("nonsense");
    expect_violation(R"({"x":[0.5,0.5]})");
    expect_violation(R"({"type":"ask"})");
    expect_violation(R"({"type":"eval","x":[0.5]})");
    expect_violation(R"({"type":"eval","x":[0.5,1.01]})");
    expect_violation(R"({"type":"eval","x":[0.5,"a"]})");
    expect_violation(R"({"type":"final_population","X":[]})");
    AuditSession s(small_config(5, 1));
    s.handle(R"({"type":"eval","x":[0.5,0.5]})");
    EXPECT_THROW(s.handle(R"({"type":"final_population","X":[[0.4,0.4]]})"), ProtocolError);
}

TEST(AuditSession, EarlyFinalIsIncomplete) {
    AuditSession s(small_config(5, 1));
    s.handle(R"({"type":"eval","x":[0.5,0.5]})");
    s.handle(R"({"type":"final_population","X":[[0.5,0.5]]})");
    const auto t = s.trace();
    EXPECT_FALSE(t.complete);
    EXPECT_EQ(t.archive.size(), 1u);
}

TEST(RunAudit, WellBehavedChildGivesValidTrace) {
    const auto out = run_audit(child("random"), small_config());
    EXPECT_TRUE(out.protocol_ok);
    EXPECT_EQ(out.exit_status, 0);
    EXPECT_TRUE(out.diagnostic.empty()) << out.diagnostic;
    EXPECT_TRUE(out.trace.complete);
    EXPECT_EQ(out.trace.archive.size(), 30u);
    EXPECT_EQ(out.trace.xl.size(), 10u);
    EXPECT_NO_THROW(validate_trace(out.trace));
}

TEST(RunAudit, OverrunRefusedAndTraceCompleteAtBudget) {
    const auto out = run_audit(child("overrun"), small_config());
    EXPECT_TRUE(out.protocol_ok);
    EXPECT_EQ(out.exit_status, 0);
    EXPECT_TRUE(out.trace.complete);
    EXPECT_EQ(out.trace.archive.size(), 30u);
}

TEST(RunAudit, CrashGivesIncompleteTrace) {
    const auto out = run_audit(child("crash", 7), small_config());
    EXPECT_FALSE(out.trace.complete);
    EXPECT_EQ(out.trace.archive.size(), 7u);
    EXPECT_NE(out.exit_status, 0);
    EXPECT_FALSE(out.diagnostic.empty());
    EXPECT_NO_THROW(validate_trace(out.trace));
}

TEST(RunAudit, ViolationsAbortWithDiagnostic) {
    for (const char* mode : {"garbage", "oob", "wrong-dim", "never-evaluated", "wrong-pop"}) {
        const auto out = run_audit(child(mode), small_config());
        EXPECT_FALSE(out.protocol_ok) << mode;
        EXPECT_NE(out.diagnostic.find("protocol violation"), std::string::npos) << mode;
        EXPECT_FALSE(out.trace.complete) << mode;
    }
}

TEST(RunAudit, EarlyFinalPopulation) {
    const auto out = run_audit(child("early-final"), small_config());
    EXPECT_TRUE(out.protocol_ok);
    EXPECT_FALSE(out.trace.complete);
    EXPECT_EQ(out.trace.archive.size(), 10u);
}

TEST(RunAudit, MissingCommandIsReported) {
    const auto out = run_audit("/nonexistent/optimiser", small_config());
    EXPECT_FALSE(out.trace.complete);
    EXPECT_EQ(out.exit_status, 127);
}

TEST(RunAudit, ExternalRandomSearchDetectedUnbiased) {
    std::vector<RunTrace> traces;
    for (std::size_t r = 0; r < 50; ++r) {
        auto cfg = small_config(2000, 20);
        cfg.run_index = r;
        auto out = run_audit(child("random", static_cast<long>(r)), cfg);
        ASSERT_TRUE(out.trace.complete);
        traces.push_back(std::move(out.trace));
    }
    DetectionConfig dc;
    dc.cei = {CeiMethod::Analytic};
    const auto rep = detect(traces, dc);
    EXPECT_LT(rep.bias_rej, 0.05);
    EXPECT_GE(rep.chi2_p_merged, 0.01);
}

TEST(RunAudit, ExternalClampedWalkDetectedBoundBiased) {
    std::vector<RunTrace> traces;
    for (std::size_t r = 0; r < 50; ++r) {
        auto cfg = small_config(2000, 20);
        cfg.problem = "f5";
        cfg.run_index = r;
        auto out = run_audit(child("clamped", static_cast<long>(r)), cfg);
        ASSERT_TRUE(out.trace.complete);
        traces.push_back(std::move(out.trace));
    }
    DetectionConfig dc;
    dc.cei = {CeiMethod::Analytic};
    EXPECT_EQ(detect(traces, dc).region, Region::E_Bound);
}
