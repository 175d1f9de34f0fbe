#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "relaxbp/simulator.hpp"

namespace {

using namespace relaxbp;
using K = DetectorKind;

SweepConfig small_config() {
  SweepConfig c;
  c.dims = {4, 4, 1};
  c.errors_target = 50;
  c.bits_max = 200000;
  c.workers = 1;
  return c;
}

bool same_except_time(const SweepRecord& a, const SweepRecord& b) {
  return a.detector == b.detector && a.snr_db == b.snr_db && a.bits == b.bits &&
         a.errors == b.errors && a.ber == b.ber && a.ber_ci_low == b.ber_ci_low &&
         a.ber_ci_high == b.ber_ci_high && a.ami == b.ami &&
         a.budget_exhausted == b.budget_exhausted;
}

TEST(MakeTrial, DependsOnlyOnSeedSnrIndex) {
  const SystemDims d{4, 4, 2};
  const Trial a = make_trial(d, 1, 8.0, 17);
  const Trial b = make_trial(d, 1, 8.0, 17);
  EXPECT_EQ(a.bits, b.bits);
  EXPECT_EQ(a.h, b.h);
  EXPECT_EQ(a.y, b.y);
  EXPECT_NE(make_trial(d, 1, 8.0, 18).h, a.h);
  EXPECT_NE(make_trial(d, 2, 8.0, 17).h, a.h);
  EXPECT_EQ(a.bits.size(), 8U);
}

TEST(RunPoint, WorkerCountDoesNotChangeResult) {
  SweepConfig c = small_config();
  c.record_ami = true;
  const DetectorSpec det{K::RBP, 3, 1, 0};
  const SweepRecord one = run_point(c, det, 6.0);
  c.workers = 8;
  const SweepRecord eight = run_point(c, det, 6.0);
  c.workers = 3;
  const SweepRecord three = run_point(c, det, 6.0);
  EXPECT_TRUE(same_except_time(one, eight));
  EXPECT_TRUE(same_except_time(one, three));
  EXPECT_GE(one.errors, 50U);
  ASSERT_TRUE(one.ami.has_value());
}

TEST(RunPoint, FullRbpMatchesSbpErrorCount) {
  const SweepConfig c = small_config();
  const SweepRecord sbp = run_point(c, {K::SBP, 5, 0, 0}, 8.0);
  const SweepRecord rbp = run_point(c, {K::RBP, 5, 3, 1}, 8.0);
  EXPECT_EQ(sbp.errors, rbp.errors);
  EXPECT_EQ(sbp.bits, rbp.bits);
}

TEST(RunPoint, MlAtSixtyDbIsErrorFree) {
  SweepConfig c = small_config();
  c.bits_max = 100000;
  const SweepRecord r = run_point(c, {K::ML, 0, 0, 0}, 60.0);
  EXPECT_GE(r.bits, 100000U);
  EXPECT_EQ(r.errors, 0U);
  EXPECT_EQ(r.ber, 0.0);
  EXPECT_TRUE(r.budget_exhausted);
  EXPECT_FALSE(r.ami.has_value());
}

TEST(RunPoint, StoppingRule) {
  SweepConfig c = small_config();
  c.errors_target = 0;
  c.trials_min = 300;
  const SweepRecord r = run_point(c, {K::MMSE, 0, 0, 0}, 10.0);
  // Whole batches of 128 trials, 4 bits each.
  EXPECT_EQ(r.bits, 3U * 128U * 4U);
  EXPECT_FALSE(r.budget_exhausted);
  EXPECT_LE(r.ber_ci_low, r.ber);
  EXPECT_GE(r.ber_ci_high, r.ber);
}

TEST(RunConvergencePoint, LastSlotMatchesPlainRun) {
  SweepConfig c = small_config();
  c.errors_target = 0;
  c.trials_min = 256;
  const auto recs = run_convergence_point(c, {K::SBP, 4, 0, 0}, 6.0);
  ASSERT_EQ(recs.size(), 4U);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(recs[k].detector.iterations, k + 1);
  const SweepRecord plain = run_point(c, {K::SBP, 4, 0, 0}, 6.0);
  EXPECT_EQ(recs.back().errors, plain.errors);
  const SweepRecord two = run_point(c, {K::SBP, 2, 0, 0}, 6.0);
  EXPECT_EQ(recs[1].errors, two.errors);
}

TEST(RunSweep, Cardinality) {
  SweepConfig c = small_config();
  c.errors_target = 5;
  c.snr_points_db = {0.0, 4.0, 8.0};
  c.detectors = {{K::MMSE, 0, 0, 0}, {K::RBP, 2, 0, 0}};
  const SweepOutcome out = run_sweep(c);
  ASSERT_EQ(out.records.size(), 6U);
  EXPECT_TRUE(out.failures.empty());
  EXPECT_EQ(out.records[0].detector.kind, K::MMSE);
  EXPECT_EQ(out.records[3].detector.kind, K::RBP);
  EXPECT_EQ(out.records[4].snr_db, 4.0);

  c.detectors.clear();
  EXPECT_TRUE(run_sweep(c).records.empty());
}

TEST(RunSweep, RepeatedRunIsIdentical) {
  SweepConfig c = small_config();
  c.errors_target = 20;
  c.snr_points_db = {2.0, 6.0};
  c.detectors = {{K::MMSE_RBP, 3, 0, 0}};
  const SweepOutcome a = run_sweep(c);
  const SweepOutcome b = run_sweep(c);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k)
    EXPECT_TRUE(same_except_time(a.records[k], b.records[k]));
}

TEST(RunSweep, FailingPointIsReportedAndSweepContinues) {
  SweepConfig c = small_config();
  c.dims = {2, 2, 1};
  c.errors_target = 1;
  c.snr_points_db = {4.0};
  c.detectors = {{K::RBP, 1, 5, 0}, {K::MMSE, 0, 0, 0}};
  const SweepOutcome out = run_sweep(c);
  EXPECT_EQ(out.failures.size(), 1U);
  EXPECT_EQ(out.records.size(), 1U);
}

SweepRecord sample_record() {
  SweepRecord r;
  r.detector = {K::MMSE_RBP, 7, 1, 1};
  r.snr_db = 10.5;
  r.bits = 123456;
  r.errors = 789;
  r.ber = double(r.errors) / double(r.bits);
  const Interval ci = wilson_interval(r.errors, r.bits);
  r.ber_ci_low = ci.low;
  r.ber_ci_high = ci.high;
  r.ami = 0.873421;
  r.wall_seconds = 1.25;
  return r;
}

TEST(Csv, HeaderOnly) {
  EXPECT_EQ(format_csv({}), std::string(kCsvHeader) + "\n");
}

TEST(Csv, OneRecordTwoLines) {
  const std::string text = format_csv({sample_record()});
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_NE(text.find("\nMMSE-RBP,1,1,7,10.5,123456,789,"), std::string::npos);
}

TEST(Csv, RoundTripThroughFile) {
  SweepRecord no_ami = sample_record();
  no_ami.ami.reset();
  no_ami.detector = {K::ML, 0, 0, 0};
  const std::vector<SweepRecord> recs{sample_record(), no_ami};
  const auto path = std::filesystem::temp_directory_path() / "relaxbp_csv_roundtrip.csv";
  write_csv(recs, path.string());
  const std::vector<SweepRecord> back = read_csv(path.string());
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), 2U);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(back[k].detector, recs[k].detector);
    EXPECT_EQ(back[k].bits, recs[k].bits);
    EXPECT_EQ(back[k].errors, recs[k].errors);
    EXPECT_EQ(back[k].ami.has_value(), recs[k].ami.has_value());
    EXPECT_NEAR(back[k].ber, recs[k].ber, 1e-6 * recs[k].ber);
  }
  // Values already at 6 significant digits survive exactly.
  EXPECT_EQ(format_csv(back), format_csv(parse_csv(format_csv(back))));
}

TEST(Csv, ErrorPaths) {
  EXPECT_THROW(parse_csv("not,a,header\n"), IoFailure);
  EXPECT_THROW(parse_csv(std::string(kCsvHeader) + "\nSBP,0,0\n"), IoFailure);
  EXPECT_THROW(parse_csv(std::string(kCsvHeader) + "\nXX,0,0,5,1,1,1,1,1,1,,0\n"),
               IoFailure);
  EXPECT_THROW(parse_csv(std::string(kCsvHeader) + "\nSBP,a,0,5,1,1,1,1,1,1,,0\n"),
               IoFailure);
  EXPECT_THROW(write_csv({}, "/nonexistent-dir/x.csv"), IoFailure);
  EXPECT_THROW(read_csv("/nonexistent-dir/x.csv"), IoFailure);
}

}  // namespace
