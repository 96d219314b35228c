#include "artic/grounding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "artic/error.hpp"

namespace artic {

// ----------------------------------------------------------------- symbols

Symbol Symbol::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  auto nonempty = [&] {
    return std::all_of(parts.begin(), parts.end(), [](const auto& p) { return !p.empty(); });
  };
  if (parts.size() == 2 && parts[0] == "obj" && nonempty()) return object(parts[1]);
  if (parts.size() == 2 && parts[0] == "rel" && nonempty()) return rel(parts[1]);
  if (parts.size() == 4 && parts[0] == "aff" && nonempty())
    return affordance(parts[1], parts[2], parts[3]);
  throw UnknownSymbol("malformed symbol '" + text + "'");
}

std::string Symbol::str() const {
  switch (kind) {
    case Kind::Object: return "obj:" + first;
    case Kind::Relation: return "rel:" + relation;
    case Kind::Affordance: return "aff:" + first + ":" + second + ":" + relation;
  }
  return {};
}

bool SymbolSpace::contains(const Symbol& s) const {
  switch (s.kind) {
    case Symbol::Kind::Object: return objects.count(s.first) > 0;
    case Symbol::Kind::Relation: return relations.count(s.relation) > 0;
    case Symbol::Kind::Affordance:
      return objects.count(s.first) && objects.count(s.second) && relations.count(s.relation);
  }
  return false;
}

std::vector<Symbol> SymbolSpace::base_symbols() const {
  std::vector<Symbol> out;
  for (const auto& o : objects) out.push_back(Symbol::object(o));
  for (const auto& r : relations) out.push_back(Symbol::rel(r));
  return out;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char ch : text) {
    if (std::isspace(ch) || std::ispunct(ch)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(char(std::tolower(ch)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// ---------------------------------------------------------------- features

namespace {

const char* kind_name(Symbol::Kind k) {
  switch (k) {
    case Symbol::Kind::Object: return "object";
    case Symbol::Kind::Relation: return "relation";
    case Symbol::Kind::Affordance: return "affordance";
  }
  return "?";
}

double log_sigmoid(double z) {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

Phrase flat_phrase(const AnnotatedSentence& s) {
  Phrase p;
  p.begin = 0;
  p.end = s.tokens.size();
  return p;
}

}  // namespace

std::vector<std::string> factor_features(const std::vector<std::string>& tokens,
                                         const Phrase& phrase, const Symbol& symbol,
                                         const std::set<Symbol>& child_symbols) {
  std::vector<std::string> f;
  f.push_back(std::string("bias|") + kind_name(symbol.kind));
  const std::string sym = symbol.str();
  const bool has_rel = symbol.kind != Symbol::Kind::Object;

  std::set<std::string> words;
  for (std::size_t k = phrase.begin; k < phrase.end && k < tokens.size(); ++k)
    words.insert(tokens[k]);
  for (const auto& w : words) {
    f.push_back("w=" + w + "|s=" + sym);
    if (has_rel) f.push_back("w=" + w + "|r=" + symbol.relation);
    if (symbol.kind != Symbol::Kind::Relation) f.push_back("w=" + w + "|o=" + symbol.first);
    if (symbol.kind == Symbol::Kind::Affordance && symbol.second != symbol.first)
      f.push_back("w=" + w + "|o=" + symbol.second);
  }
  for (const auto& c : child_symbols) {
    f.push_back("c=" + c.str() + "|s=" + sym);
    if (has_rel) f.push_back("c=" + c.str() + "|r=" + symbol.relation);
  }
  return f;
}

double GroundingModel::weight(const std::string& feature) const {
  auto it = weights_.find(feature);
  return it == weights_.end() ? 0.0 : it->second;
}

double GroundingModel::score(const std::vector<std::string>& tokens, const Phrase& phrase,
                             const Symbol& symbol,
                             const std::set<Symbol>& child_symbols) const {
  double z = 0.0;
  for (const auto& f : factor_features(tokens, phrase, symbol, child_symbols)) z += weight(f);
  return z;
}

// ---------------------------------------------------------------- training

namespace {

struct Example {
  std::vector<std::size_t> features;
  double label;
};

double objective(const std::vector<Example>& data, const std::vector<double>& w, double l2) {
  double ll = 0.0;
  for (const auto& ex : data) {
    double z = 0.0;
    for (auto f : ex.features) z += w[f];
    ll += ex.label > 0.5 ? log_sigmoid(z) : log_sigmoid(-z);
  }
  double sq = 0.0;
  for (double x : w) sq += x * x;
  return ll - 0.5 * l2 * sq;
}

}  // namespace

GroundingModel train(const Corpus& corpus, const TrainConfig& cfg) {
  if (corpus.sentences.empty()) throw SchemaError("training corpus is empty");

  std::vector<std::vector<std::string>> raw_features;
  std::vector<double> labels;
  for (const auto& s : corpus.sentences) {
    std::vector<Phrase> phrases = s.phrases;
    if (phrases.empty()) throw SchemaError("training sentence has no annotated phrases");
    for (const auto& p : phrases) {
      std::set<Symbol> child;
      for (auto c : p.children) {
        if (c >= phrases.size()) throw SchemaError("phrase child index out of range");
        for (const auto& [sym, phi] : phrases[c].annotations)
          if (phi) child.insert(sym);
      }
      for (const auto& [sym, phi] : p.annotations) {
        if (!corpus.space.contains(sym))
          throw UnknownSymbol("symbol '" + sym.str() + "' is not in the symbol space");
        raw_features.push_back(factor_features(s.tokens, p, sym, child));
        labels.push_back(phi ? 1.0 : 0.0);
      }
    }
  }

  std::map<std::string, std::size_t> index;
  for (const char* k : {"bias|object", "bias|relation", "bias|affordance"}) index.emplace(k, 0);
  for (const auto& fs : raw_features)
    for (const auto& f : fs) index.emplace(f, 0);
  std::vector<std::string> names;
  for (auto& [name, id] : index) {
    id = names.size();
    names.push_back(name);
  }

  std::vector<Example> data;
  for (std::size_t e = 0; e < raw_features.size(); ++e) {
    Example ex{{}, labels[e]};
    for (const auto& f : raw_features[e]) ex.features.push_back(index.at(f));
    data.push_back(std::move(ex));
  }

  std::vector<double> w(names.size(), 0.0);
  double step = cfg.step;
  double obj = objective(data, w, cfg.l2);
  GroundingModel model(corpus.space);
  model.l2_ = cfg.l2;
  model.trace_.push_back(obj);

  std::vector<double> grad(w.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t k = 0; k < w.size(); ++k) grad[k] = -cfg.l2 * w[k];
    for (const auto& ex : data) {
      double z = 0.0;
      for (auto f : ex.features) z += w[f];
      const double r = ex.label - sigmoid(z);
      for (auto f : ex.features) grad[f] += r;
    }
    bool moved = false;
    for (int halving = 0; halving < 80; ++halving) {
      std::vector<double> trial(w);
      for (std::size_t k = 0; k < w.size(); ++k) trial[k] += step * grad[k];
      const double next = objective(data, trial, cfg.l2);
      if (next >= obj) {
        w = std::move(trial);
        obj = next;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    model.trace_.push_back(obj);
    if (!moved) break;
  }

  for (std::size_t k = 0; k < names.size(); ++k) model.weights_[names[k]] = w[k];
  return model;
}

// -------------------------------------------------------------- evaluation

LanguageObservation evaluate(const GroundingModel& model, const AnnotatedSentence& sentence,
                             const std::vector<Symbol>& candidates) {
  LanguageObservation obs;
  obs.tokens = sentence.tokens;
  if (candidates.empty()) return obs;

  std::vector<Phrase> phrases = sentence.phrases;
  if (phrases.empty()) phrases.push_back(flat_phrase(sentence));
  const std::size_t n = phrases.size();

  // Post-order so children are resolved before parents.
  std::vector<std::set<Symbol>> expressed(n);
  std::vector<std::set<Symbol>> child_of(n);
  std::vector<int> state(n, 0);
  const auto base = model.space().base_symbols();
  auto visit = [&](auto&& self, std::size_t p) -> void {
    if (state[p] == 2) return;
    if (state[p] == 1) throw SchemaError("phrase tree has a cycle");
    state[p] = 1;
    for (auto c : phrases[p].children) {
      if (c >= n) throw SchemaError("phrase child index out of range");
      self(self, c);
      child_of[p].insert(expressed[c].begin(), expressed[c].end());
    }
    for (const auto& s : base)
      if (model.score(sentence.tokens, phrases[p], s, child_of[p]) > 0.0) expressed[p].insert(s);
    state[p] = 2;
  };
  for (std::size_t p = 0; p < n; ++p) visit(visit, p);

  for (const auto& c : candidates) {
    double lp = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      lp += log_sigmoid(model.score(sentence.tokens, phrases[p], c, child_of[p]));
    obs.log_p[c] = lp;
  }
  return obs;
}

std::vector<Symbol> affordance_candidates(const std::string& a, const std::string& b) {
  std::vector<Symbol> out;
  for (auto m : kModelTypes) out.push_back(Symbol::affordance(a, b, m));
  return out;
}

double language_log_lik(const LanguageObservation& obs,
                        const std::optional<std::string>& i_type,
                        const std::optional<std::string>& j_type, ModelType model) {
  if (!i_type || !j_type) return 0.0;
  if (auto it = obs.log_p.find(Symbol::affordance(*i_type, *j_type, model));
      it != obs.log_p.end())
    return it->second;
  if (auto it = obs.log_p.find(Symbol::affordance(*j_type, *i_type, model));
      it != obs.log_p.end())
    return it->second;
  return 0.0;
}

double language_log_lik(const std::vector<LanguageObservation>& obs,
                        const std::optional<std::string>& i_type,
                        const std::optional<std::string>& j_type, ModelType model) {
  double total = 0.0;
  for (const auto& o : obs) total += language_log_lik(o, i_type, j_type, model);
  return total;
}

bool mentions(const LanguageObservation& obs, const std::string& i_type,
              const std::string& j_type) {
  for (auto m : kModelTypes)
    if (obs.log_p.count(Symbol::affordance(i_type, j_type, m)) ||
        obs.log_p.count(Symbol::affordance(j_type, i_type, m)))
      return true;
  return false;
}

// -------------------------------------------------------------- file formats

namespace {

std::vector<std::string> string_list(const Json& j, const std::string& name) {
  if (!j.is_array()) throw SchemaError("field '" + name + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw SchemaError("field '" + name + "' must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

void collect(SymbolSpace& space, const Symbol& s) {
  if (s.kind != Symbol::Kind::Relation) space.objects.insert(s.first);
  if (s.kind == Symbol::Kind::Affordance) space.objects.insert(s.second);
  if (s.kind != Symbol::Kind::Object) space.relations.insert(s.relation);
}

}  // namespace

AnnotatedSentence sentence_from_json(const Json& j, bool require_annotations) {
  if (!j.is_object()) throw SchemaError("sentence must be an object");
  AnnotatedSentence s;
  if (j.contains("tokens")) {
    for (const auto& t : string_list(j["tokens"], "tokens")) {
      auto sub = tokenize(t);
      if (sub.size() != 1) throw SchemaError("field 'tokens' entry '" + t + "' is not one token");
      s.tokens.push_back(sub.front());
    }
  } else if (j.contains("text") && j["text"].is_string()) {
    s.tokens = tokenize(j["text"].get<std::string>());
  } else {
    throw SchemaError("sentence needs 'tokens' or 'text'");
  }
  if (j.contains("phrases")) {
    if (!j["phrases"].is_array()) throw SchemaError("field 'phrases' must be an array");
    for (const auto& jp : j["phrases"]) {
      Phrase p;
      if (!jp.contains("span") || !jp["span"].is_array() || jp["span"].size() != 2)
        throw SchemaError("field 'span' must be [begin, end]");
      p.begin = jp["span"][0].get<std::size_t>();
      p.end = jp["span"][1].get<std::size_t>();
      if (p.begin > p.end || p.end > s.tokens.size())
        throw SchemaError("field 'span' is outside the token list");
      if (jp.contains("children"))
        for (const auto& c : jp["children"]) p.children.push_back(c.get<std::size_t>());
      if (jp.contains("annotations")) {
        for (const auto& ja : jp["annotations"]) {
          if (!ja.contains("symbol") || !ja["symbol"].is_string() || !ja.contains("phi") ||
              !ja["phi"].is_boolean())
            throw SchemaError("annotation needs string 'symbol' and boolean 'phi'");
          p.annotations.emplace_back(Symbol::parse(ja["symbol"].get<std::string>()),
                                     ja["phi"].get<bool>());
        }
      }
      if (require_annotations && p.annotations.empty())
        throw SchemaError("field 'annotations' is empty for a training phrase");
      s.phrases.push_back(std::move(p));
    }
    for (const auto& p : s.phrases)
      for (auto c : p.children)
        if (c >= s.phrases.size()) throw SchemaError("field 'children' index out of range");
  }
  if (require_annotations && s.phrases.empty())
    throw SchemaError("training sentence has no 'phrases'");
  return s;
}

Json sentence_to_json(const AnnotatedSentence& s) {
  Json phrases = Json::array();
  for (const auto& p : s.phrases) {
    Json ann = Json::array();
    for (const auto& [sym, phi] : p.annotations) ann.push_back({{"symbol", sym.str()}, {"phi", phi}});
    phrases.push_back({{"span", {p.begin, p.end}}, {"children", p.children}, {"annotations", ann}});
  }
  return {{"tokens", s.tokens}, {"phrases", phrases}};
}

Corpus corpus_from_json(const Json& j) {
  check_format_version(j);
  Corpus c;
  const bool declared = j.contains("objects") || j.contains("relations");
  if (j.contains("objects"))
    for (const auto& o : string_list(j["objects"], "objects")) c.space.objects.insert(o);
  if (j.contains("relations"))
    for (const auto& r : string_list(j["relations"], "relations")) c.space.relations.insert(r);
  if (!j.contains("sentences") || !j["sentences"].is_array())
    throw SchemaError("field 'sentences' must be an array");
  for (const auto& js : j["sentences"]) c.sentences.push_back(sentence_from_json(js, true));
  for (const auto& s : c.sentences)
    for (const auto& p : s.phrases)
      for (const auto& [sym, phi] : p.annotations) {
        if (declared && !c.space.contains(sym))
          throw UnknownSymbol("symbol '" + sym.str() + "' is not declared in the corpus");
        if (!declared) collect(c.space, sym);
      }
  return c;
}

Json corpus_to_json(const Corpus& c) {
  Json sentences = Json::array();
  for (const auto& s : c.sentences) sentences.push_back(sentence_to_json(s));
  return {{"format_version", kFormatVersion},
          {"objects", c.space.objects},
          {"relations", c.space.relations},
          {"sentences", sentences}};
}

Corpus load_corpus(const std::filesystem::path& path) {
  return corpus_from_json(parse_json_document(read_file(path)));
}

Json GroundingModel::to_json() const {
  Json w = Json::object();
  for (const auto& [k, v] : weights_) w[k] = v;
  return {{"format_version", kFormatVersion},
          {"l2", l2_},
          {"objects", space_.objects},
          {"relations", space_.relations},
          {"weights", w}};
}

GroundingModel GroundingModel::from_json(const Json& j) {
  check_format_version(j);
  GroundingModel m;
  if (j.contains("objects"))
    for (const auto& o : string_list(j["objects"], "objects")) m.space_.objects.insert(o);
  if (j.contains("relations"))
    for (const auto& r : string_list(j["relations"], "relations")) m.space_.relations.insert(r);
  if (j.contains("l2") && j["l2"].is_number()) m.l2_ = j["l2"].get<double>();
  if (!j.contains("weights") || !j["weights"].is_object())
    throw SchemaError("field 'weights' must be an object");
  for (const auto& [k, v] : j["weights"].items()) {
    if (!v.is_number()) throw SchemaError("weight '" + k + "' is not a number");
    const double w = v.get<double>();
    if (!std::isfinite(w)) throw SchemaError("weight '" + k + "' is not finite");
    m.weights_[k] = w;
  }
  return m;
}

GroundingModel load_grounding_model(const std::filesystem::path& path) {
  return GroundingModel::from_json(parse_json_document(read_file(path)));
}

void save_grounding_model(const GroundingModel& m, const std::filesystem::path& path) {
  write_file(path, m.to_json().dump(1) + "\n");
}

std::vector<AnnotatedSentence> utterances_from_json(const Json& j) {
  check_format_version(j);
  if (!j.contains("utterances") || !j["utterances"].is_array())
    throw SchemaError("field 'utterances' must be an array");
  std::vector<AnnotatedSentence> out;
  for (const auto& u : j["utterances"]) out.push_back(sentence_from_json(u, false));
  return out;
}

std::vector<AnnotatedSentence> load_utterances(const std::filesystem::path& path) {
  return utterances_from_json(parse_json_document(read_file(path)));
}

}  // namespace artic
