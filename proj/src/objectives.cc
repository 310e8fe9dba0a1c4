#include "ncc/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "ncc/errors.hpp"

namespace ncc {

std::string_view objective_name(ObjectiveKind kind) { return kind == ObjectiveKind::I ? "I" : "V"; }

ObjectiveKind parse_objective(std::string_view name) {
  if (name == "i" || name == "I") return ObjectiveKind::I;
  if (name == "v" || name == "V") return ObjectiveKind::V;
  throw ConfigError("unknown objective '" + std::string(name) + "'");
}

double info_term(double p, double marginal, double target_marginal) {
  if (!(p > 0.0)) return 0.0;
  return p * std::log(p / (marginal * target_marginal));
}

PredictiveValueTable predictive_value_i(const TranslationModel& model) {
  PredictiveValueTable table;
  table.kind = ObjectiveKind::I;
  table.values.assign(model.source_vocab().size(), 0.0);
  table.words = model.source_support();
  for (TokenId s : model.source_support()) {
    const double ps = model.marginal_source(s);
    double v = 0.0;
    for (const auto& e : model.row(s)) v += info_term(e.probability, ps, model.marginal_target(e.target));
    table.values[s] = v;
    table.total += v;
  }
  return table;
}

double mutual_information(const TranslationModel& model) { return predictive_value_i(model).total; }

TokenId most_likely_translation(const TranslationModel& model, TokenId s) {
  auto row = model.row(s);
  if (row.empty()) throw DomainError("source word has no mass in the model");
  const Vocabulary& tv = model.target_vocab();
  const JointEntry* best = &row.front();
  for (const auto& e : row.subspan(1)) {
    if (e.probability != best->probability) {
      if (e.probability > best->probability) best = &e;
      continue;
    }
    const double me = model.marginal_target(e.target), mb = model.marginal_target(best->target);
    if (me != mb) {
      if (me > mb) best = &e;
      continue;
    }
    if (tv.surface(e.target) < tv.surface(best->target)) best = &e;
  }
  return best->target;
}

ObjectiveV objective_v(const TranslationModel& model) {
  ObjectiveV out;
  out.table.kind = ObjectiveKind::V;
  out.table.values.assign(model.source_vocab().size(), 0.0);
  out.table.words = model.source_support();
  for (TokenId s : model.source_support()) {
    const TokenId t = most_likely_translation(model, s);
    const double v = info_term(model.joint(s, t), model.marginal_source(s), model.marginal_target(t));
    out.table.values[s] = v;
    out.table.total += v;
  }
  out.total = out.table.total;
  return out;
}

PredictiveValueTable predictive_values(const TranslationModel& model, ObjectiveKind kind) {
  return kind == ObjectiveKind::I ? predictive_value_i(model) : objective_v(model).table;
}

double objective_total(const TranslationModel& model, ObjectiveKind kind) {
  return predictive_values(model, kind).total;
}

void write_predictive_values(const PredictiveValueTable& table, const Vocabulary& source_vocab,
                             std::ostream& out) {
  std::vector<TokenId> ids = table.words;
  std::sort(ids.begin(), ids.end(),
            [&](TokenId a, TokenId b) { return source_vocab.surface(a) < source_vocab.surface(b); });
  char buf[64];
  out << "s\tvalue_nats\n";
  for (TokenId s : ids) {
    std::snprintf(buf, sizeof buf, "%.12g", table.values[s]);
    out << source_vocab.surface(s) << '\t' << buf << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.12g", table.total);
  out << "<total>\t" << buf << '\n';
}

}  // namespace ncc
