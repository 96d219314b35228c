#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "artic/kinfit.hpp"
#include "artic/trackio.hpp"

namespace artic {

/// Grounding symbol: an object type, a relation type, or an affordance
/// (object type, object type, relation type). Text form is "obj:door",
/// "rel:prismatic" or "aff:drawer:cabinet:prismatic".
struct Symbol {
  enum class Kind { Object = 0, Relation = 1, Affordance = 2 };
  Kind kind = Kind::Object;
  std::string first;     // object type (Object, Affordance)
  std::string second;    // second object type (Affordance)
  std::string relation;  // relation type (Relation, Affordance)

  static Symbol object(std::string o) { return {Kind::Object, std::move(o), {}, {}}; }
  static Symbol rel(std::string r) { return {Kind::Relation, {}, {}, std::move(r)}; }
  static Symbol affordance(std::string a, std::string b, std::string r) {
    return {Kind::Affordance, std::move(a), std::move(b), std::move(r)};
  }
  static Symbol affordance(std::string a, std::string b, ModelType m) {
    return affordance(std::move(a), std::move(b), to_string(m));
  }
  /// Throws UnknownSymbol when the text is malformed.
  static Symbol parse(const std::string& text);
  std::string str() const;

  auto operator<=>(const Symbol&) const = default;
};

struct SymbolSpace {
  std::set<std::string> objects;
  /// Always contains rigid, prismatic and rotational.
  std::set<std::string> relations{"prismatic", "rigid", "rotational"};

  bool contains(const Symbol& s) const;
  /// Object and relation groundings, used to infer what child phrases express.
  std::vector<Symbol> base_symbols() const;
};

struct Phrase {
  std::size_t begin = 0;  // token span [begin, end)
  std::size_t end = 0;
  std::vector<std::size_t> children;  // indices into AnnotatedSentence::phrases
  std::vector<std::pair<Symbol, bool>> annotations;
};

struct AnnotatedSentence {
  std::vector<std::string> tokens;
  std::vector<Phrase> phrases;  // empty: one flat phrase over all tokens
};

struct Corpus {
  SymbolSpace space;
  std::vector<AnnotatedSentence> sentences;
};

/// Lowercases and splits on whitespace and punctuation.
std::vector<std::string> tokenize(const std::string& text);

struct TrainConfig {
  double l2 = 0.01;
  int epochs = 300;
  double step = 0.5;
};

/// Log-linear factor model over binary features of (phrase, symbol, child
/// symbols).
class GroundingModel {
 public:
  GroundingModel() = default;
  explicit GroundingModel(SymbolSpace space) : space_(std::move(space)) {}

  const SymbolSpace& space() const { return space_; }
  double l2() const { return l2_; }
  /// Feature name -> weight (absent features weigh 0).
  const std::map<std::string, double>& weights() const { return weights_; }
  double weight(const std::string& feature) const;

  /// Linear score of one factor.
  double score(const std::vector<std::string>& tokens, const Phrase& phrase,
               const Symbol& symbol, const std::set<Symbol>& child_symbols) const;

  /// Objective value per epoch (log-likelihood minus L2 penalty) of the last
  /// training run.
  const std::vector<double>& objective_trace() const { return trace_; }

  Json to_json() const;
  static GroundingModel from_json(const Json& j);

  friend GroundingModel train(const Corpus& corpus, const TrainConfig& cfg);

 private:
  SymbolSpace space_;
  double l2_ = 0.0;
  std::map<std::string, double> weights_;
  std::vector<double> trace_;
};

/// Binary features that fire for a factor.
std::vector<std::string> factor_features(const std::vector<std::string>& tokens,
                                         const Phrase& phrase, const Symbol& symbol,
                                         const std::set<Symbol>& child_symbols);

/// Full-batch gradient ascent on the L2-penalised logistic likelihood of
/// every annotated factor. The step is halved whenever it would lower the
/// objective, so the per-epoch objective never decreases.
/// Throws UnknownSymbol for annotations outside the corpus symbol space.
GroundingModel train(const Corpus& corpus, const TrainConfig& cfg = {});

/// log P(phi = true) per candidate affordance for one utterance.
struct LanguageObservation {
  std::vector<std::string> tokens;
  std::map<Symbol, double> log_p;
};

/// Sums log sigma(w . f) over the phrases of the sentence for every
/// candidate. Child symbols of a phrase are the base symbols its children
/// express with probability above one half.
LanguageObservation evaluate(const GroundingModel& model, const AnnotatedSentence& sentence,
                             const std::vector<Symbol>& candidates);

/// Affordance candidates relating two object types, one per model type.
std::vector<Symbol> affordance_candidates(const std::string& a, const std::string& b);

/// Language evidence for edge (i, j) under `model`: the stored value for
/// (i_type, j_type, model), falling back to the swapped pair, else 0.
double language_log_lik(const LanguageObservation& obs,
                        const std::optional<std::string>& i_type,
                        const std::optional<std::string>& j_type, ModelType model);
double language_log_lik(const std::vector<LanguageObservation>& obs,
                        const std::optional<std::string>& i_type,
                        const std::optional<std::string>& j_type, ModelType model);
/// Whether an observation carries evidence for the type pair.
bool mentions(const LanguageObservation& obs, const std::string& i_type,
              const std::string& j_type);

// File formats.
AnnotatedSentence sentence_from_json(const Json& j, bool require_annotations);
Json sentence_to_json(const AnnotatedSentence& s);
Corpus corpus_from_json(const Json& j);
Json corpus_to_json(const Corpus& c);
Corpus load_corpus(const std::filesystem::path& path);
GroundingModel load_grounding_model(const std::filesystem::path& path);
void save_grounding_model(const GroundingModel& m, const std::filesystem::path& path);
/// {"utterances": [{"text": ...} | {"tokens": [...], "phrases": [...]}]}
std::vector<AnnotatedSentence> load_utterances(const std::filesystem::path& path);
std::vector<AnnotatedSentence> utterances_from_json(const Json& j);

}  // namespace artic
