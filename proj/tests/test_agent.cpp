#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "check.hpp"

#include <cmath>
#include <numbers>

#include "citygen/agent.hpp"
#include "citygen/error.hpp"
#include "support.hpp"

using namespace citygen;
using namespace citygen::testing;

namespace {

Population dummyPopulation(int n, int generation = 0) {
  Population pop;
  pop.candidates.assign(n, emptyCity({4, 4}));
  pop.generationIndex = generation;
  return pop;
}

std::vector<CandidateAttributes> waterRow(std::initializer_list<double> water) {
  std::vector<CandidateAttributes> out;
  for (const double w : water) {
    CandidateAttributes a;
    a.waterFraction = w;
    a.avgBuildingHeight = 5;
    out.push_back(a);
  }
  return out;
}

TrainingInstance labelled(double water, Label label, StreetStyle style = StreetStyle::NewYork) {
  TrainingInstance t;
  t.attributes.waterFraction = water;
  t.attributes.streetStyle = style;
  t.attributes.avgBuildingHeight = 5;
  t.attributes.buildingCount = 40;
  t.attributes.centreHeightRatio = 1;
  t.attributes.label = label;
  return t;
}

double gaussianPdf(double x, double mean, double var) {
  return std::exp(-(x - mean) * (x - mean) / (2 * var)) / std::sqrt(2 * std::numbers::pi * var);
}

}  // namespace

TEST_CASE("recordSelection labels the two parents") {
  TrainingSet ts;
  const Population pop = dummyPopulation(9, 4);
  const auto attrs = waterRow({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  recordSelection(ts, pop, {2, 5}, attrs, "r");
  REQUIRE(ts.size() == 9);
  for (int i = 0; i < 9; ++i) {
    const auto& inst = ts.instances[i];
    CHECK(inst.attributes.label == (i == 2 || i == 5 ? Label::Selected : Label::Rejected));
    CHECK(inst.provenance == Provenance{"r", 4, i});
    CHECK(inst.attributes.waterFraction == attrs[i].waterFraction);
  }
  CHECK(trainingSetFromJsonl(toJsonl(ts)) == ts);

  const auto eight = waterRow({0, 0, 0, 0, 0, 0, 0, 0});
  try {
    recordSelection(ts, pop, {0, 1}, eight, "r");
    FAIL("expected MisalignedInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MisalignedInput);
  }
}

TEST_CASE("ten interactive generations give 90 instances, 20 selected") {
  TrainingSet ts;
  const auto attrs = waterRow({0, 0, 0, 0, 0, 0, 0, 0, 0});
  for (int g = 0; g < 10; ++g) recordSelection(ts, dummyPopulation(9, g), {g % 9, (g + 3) % 9}, attrs, "r");
  CHECK(ts.size() == 90);
  CHECK(ts.counts() == ClassCounts{20, 70});
}

TEST_CASE("Bayes priors from a 20/70 set") {
  TrainingSet ts;
  for (int i = 0; i < 20; ++i) ts.instances.push_back(labelled(0.01 * i, Label::Selected));
  for (int i = 0; i < 70; ++i) ts.instances.push_back(labelled(0.3 + 0.005 * i, Label::Rejected));
  const BayesModel m = fitBayes(ts, AgentConfig{});
  CHECK(m.priors[1] == doctest::Approx(2.0 / 9.0));
  CHECK(m.priors[0] == doctest::Approx(7.0 / 9.0));
  CHECK(m.priors[0] + m.priors[1] == doctest::Approx(1.0));
}

TEST_CASE("Bayes posterior matches the closed form on separated clusters") {
  TrainingSet ts;
  const double sel[] = {0.03, 0.05, 0.07, 0.04, 0.06};
  const double rej[] = {0.55, 0.6, 0.65, 0.58, 0.62, 0.6};
  for (const double w : sel) ts.instances.push_back(labelled(w, Label::Selected));
  for (const double w : rej) ts.instances.push_back(labelled(w, Label::Rejected));
  const BayesModel m = fitBayes(ts, AgentConfig{});

  auto meanVar = [](std::span<const double> xs) {
    double mean = 0;
    for (const double x : xs) mean += x;
    mean /= xs.size();
    double var = 0;
    for (const double x : xs) var += (x - mean) * (x - mean);
    return std::pair{mean, var / xs.size()};
  };
  const auto [ms, vs] = meanVar(sel);
  const auto [mr, vr] = meanVar(rej);
  // Other attributes are constant in both classes and cancel; style is
  // NewYork everywhere, so both smoothed style terms are (n+1)/(n+2).
  const double q = 0.05;
  const double ls = (5.0 / 11) * gaussianPdf(q, ms, vs) * (6.0 / 7);
  const double lr = (6.0 / 11) * gaussianPdf(q, mr, vr) * (7.0 / 8);
  CandidateAttributes query = labelled(q, Label::Unlabeled).attributes;
  const auto post = m.posterior(query);
  CHECK(post[1] == doctest::Approx(ls / (ls + lr)).epsilon(1e-9));
  CHECK(post[1] > 0.99);
  CHECK(classify(m, query).label == Label::Selected);
}

TEST_CASE("Bayes on uninformative numeric data reduces to priors and style") {
  TrainingSet ts;
  for (int i = 0; i < 3; ++i) {
    for (const double w : {0.1, 0.2, 0.3}) ts.instances.push_back(labelled(w, Label::Selected));
  }
  for (int i = 0; i < 6; ++i) {
    for (const double w : {0.1, 0.2, 0.3}) ts.instances.push_back(labelled(w, Label::Rejected));
  }
  const BayesModel m = fitBayes(ts, AgentConfig{});
  // Identical numeric distributions cancel; what is left is the prior times
  // the smoothed NewYork frequency, (9+1)/(9+2) and (18+1)/(18+2).
  const double ls = (1.0 / 3) * (10.0 / 11);
  const double lr = (2.0 / 3) * (19.0 / 20);
  for (const double q : {0.0, 0.15, 0.9}) {
    const auto post = m.posterior(labelled(q, Label::Unlabeled).attributes);
    CHECK(post[1] == doctest::Approx(ls / (ls + lr)).epsilon(1e-9));
  }
}

TEST_CASE("Bayes score falls as water rises when selected water is lower") {
  TrainingSet ts;
  for (const double w : {0.0, 0.1, 0.2}) ts.instances.push_back(labelled(w, Label::Selected));
  for (const double w : {0.3, 0.4, 0.5}) ts.instances.push_back(labelled(w, Label::Rejected));
  const Classifier model = fitBayes(ts, AgentConfig{});
  double previous = 2.0;
  for (int i = 0; i <= 20; ++i) {
    const double score = selectedScore(model, labelled(0.05 * i, Label::Unlabeled).attributes);
    CHECK(score < previous);
    previous = score;
  }
}

TEST_CASE("fitBayes and fitClassifier on a single class") {
  TrainingSet ts;
  ts.instances.push_back(labelled(0.1, Label::Rejected));
  ts.instances.push_back(labelled(0.2, Label::Rejected));
  CHECK_THROWS_AS(fitBayes(ts, AgentConfig{}), Error);
  CHECK_FALSE(fitClassifier(ts, AgentConfig{}).has_value());
}

TEST_CASE("pickTopTwo tie rules") {
  const std::vector<double> one = {0.9, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
  CHECK(pickTopTwo(one) == std::pair{0, 1});
  const std::vector<double> flat(9, 0.5);
  CHECK(pickTopTwo(flat) == std::pair{0, 1});
  const std::vector<double> late = {0.1, 0.2, 0.8, 0.3, 0.8, 0.1, 0.9, 0.1, 0.1};
  CHECK(pickTopTwo(late) == std::pair{6, 2});
}

TEST_CASE("tree agent picks the two low-water candidates") {
  TrainingSet ts;
  for (const double w : {0.02, 0.05, 0.08, 0.13}) ts.instances.push_back(labelled(w, Label::Selected));
  for (const double w : {0.15, 0.3, 0.5, 0.7}) ts.instances.push_back(labelled(w, Label::Rejected));
  const Classifier model = induceTree(ts, AgentConfig{});
  const auto attrs = waterRow({0.4, 0.3, 0.6, 0.1, 0.5, 0.2, 0.05, 0.9, 0.35});
  Rng rng(1);
  const AgentChoice choice = selectAsAgent(&model, attrs, rng);
  CHECK(choice.selection.first == 3);
  CHECK(choice.selection.second == 6);
  CHECK(choice.selection.source == SelectionSource::Agent);
  CHECK(choice.meanConfidence == 1.0);
}

TEST_CASE("agent fallback without a model") {
  const auto attrs = waterRow({0, 0, 0, 0, 0, 0, 0, 0, 0});
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const AgentChoice c = selectAsAgent(nullptr, attrs, rng);
    CHECK(c.meanConfidence == 0.5);
    CHECK(c.selection.first != c.selection.second);
    CHECK_NOTHROW(c.selection.validate(9));
  }
}

TEST_CASE("effective mutation rate") {
  const AgentConfig cfg;
  CHECK(effectiveMutationRate(0.2, 0.9, cfg) == 0.2);
  CHECK(effectiveMutationRate(0.2, 0.4, cfg) == doctest::Approx(0.3));
  CHECK(effectiveMutationRate(0.4, 0.1, cfg) == 0.5);
  CHECK(effectiveMutationRate(0.2, 0.6, cfg) == 0.2);
}

TEST_CASE("agent config validation") {
  AgentConfig cfg;
  cfg.confidenceThreshold = 0.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.mutationBoost = 0.9;
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK(parseClassifierKind("bayes") == ClassifierKind::Bayes);
}
