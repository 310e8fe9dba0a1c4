#ifndef NCC_OBJECTIVES_HPP_
#define NCC_OBJECTIVES_HPP_

#include <iosfwd>
#include <string_view>
#include <vector>

#include "ncc/linker.hpp"

namespace ncc {

// I: mutual information. V: the bag-of-words objective, which keeps only the
// most likely translation of each source word.
enum class ObjectiveKind { I, V };

std::string_view objective_name(ObjectiveKind kind);  // "I" / "V"
ObjectiveKind parse_objective(std::string_view name);  // accepts i, v, I, V

// Per-source-word share of an objective, in nats, indexed by source id.
struct PredictiveValueTable {
  ObjectiveKind kind = ObjectiveKind::I;
  std::vector<double> values;
  std::vector<TokenId> words;  // source ids with mass, ascending
  double total = 0.0;

  double operator()(TokenId s) const { return s < values.size() ? values[s] : 0.0; }
};

// Σ Pr(s,t) ln[Pr(s,t) / (Pr(s) Pr(t))], natural log.
double mutual_information(const TranslationModel& model);
PredictiveValueTable predictive_value_i(const TranslationModel& model);

// argmax_t Pr(s,t); ties go to the larger target marginal, then the smaller
// surface. Throws DomainError for a source word with no mass.
TokenId most_likely_translation(const TranslationModel& model, TokenId s);

struct ObjectiveV {
  double total = 0.0;
  PredictiveValueTable table;
};
ObjectiveV objective_v(const TranslationModel& model);

// Dispatches on kind.
PredictiveValueTable predictive_values(const TranslationModel& model, ObjectiveKind kind);
double objective_total(const TranslationModel& model, ObjectiveKind kind);

// One term p ln(p / (marginal * target_marginal)); zero when p is zero.
double info_term(double p, double marginal, double target_marginal);

// "s\tvalue_nats" rows sorted by surface, then a "<total>" trailer row.
void write_predictive_values(const PredictiveValueTable& table, const Vocabulary& source_vocab,
                             std::ostream& out);

}  // namespace ncc

#endif  // NCC_OBJECTIVES_HPP_
