#include "sgca/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sgca/jsonio.hpp"
#include "sgca/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "SGE1 I/O assumes a little-endian host");

namespace sgca::data {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'E', '1'};

void append_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

std::uint32_t read_u32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

}  // namespace

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "dev") return Split::dev;
  if (s == "test") return Split::test;
  throw ValidationError("bad_split", "unknown split name: " + s);
}

const char* split_name(Split s) {
  switch (s) {
    case Split::train:
      return "train";
    case Split::dev:
      return "dev";
    case Split::test:
      return "test";
  }
  return "?";
}

int ParticipantRecord::total_label() const {
  int t = 0;
  for (int l : labels) t += l;
  return t;
}

std::array<double, 8> ParticipantRecord::labels_d() const {
  std::array<double, 8> out{};
  for (std::size_t s = 0; s < 8; ++s) out[s] = static_cast<double>(labels[s]);
  return out;
}

void ParticipantRecord::validate() const {
  if (segments.rows == 0) {
    throw ValidationError("empty_segments",
                          "record " + id + ": no segments");
  }
  for (std::size_t s = 0; s < 8; ++s) {
    if (labels[s] < 0 || labels[s] > kMaxSymptomScore) {
      throw ValidationError(
          "label_out_of_range",
          "record " + id + ": label " + std::to_string(labels[s]) +
              " for symptom " + std::string(kSymptomNames[s]) +
              " outside {0..3}");
    }
  }
}

std::size_t Corpus::split_size(Split s) const {
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.split == s) ++n;
  }
  return n;
}

std::vector<const ParticipantRecord*> Corpus::split_records(Split s) const {
  std::vector<const ParticipantRecord*> out;
  for (const auto& r : records) {
    if (r.split == s) out.push_back(&r);
  }
  std::sort(out.begin(), out.end(),
            [](const ParticipantRecord* a, const ParticipantRecord* b) {
              return a->id < b->id;
            });
  return out;
}

Matrix read_embedding_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ValidationError("embedding_not_found",
                          "embedding file does not exist: " + path.string());
  }
  const std::string raw = jsonio::read_file(path);
  if (raw.size() < 12 || std::memcmp(raw.data(), kMagic, 4) != 0) {
    throw FormatError("bad_magic",
                      "not an SGE1 file (bad magic): " + path.string());
  }
  const std::uint32_t rows = read_u32(raw.data() + 4);
  const std::uint32_t cols = read_u32(raw.data() + 8);
  const std::size_t expected =
      12 + static_cast<std::size_t>(rows) * cols * sizeof(float);
  if (raw.size() != expected) {
    throw FormatError("truncated_file",
                      path.string() + ": expected " +
                          std::to_string(expected) + " bytes, found " +
                          std::to_string(raw.size()));
  }
  Matrix m(rows, cols);
  const char* p = raw.data() + 12;
  for (std::size_t i = 0; i < m.size(); ++i) {
    float f;
    std::memcpy(&f, p + i * sizeof(float), sizeof(float));
    m.data[i] = static_cast<double>(f);
  }
  return m;
}

void write_embedding_file(const std::filesystem::path& path, const Matrix& m) {
  std::string out;
  out.reserve(12 + m.size() * sizeof(float));
  out.append(kMagic, 4);
  append_u32(out, static_cast<std::uint32_t>(m.rows));
  append_u32(out, static_cast<std::uint32_t>(m.cols));
  for (double v : m.data) {
    const float f = static_cast<float>(v);
    char buf[4];
    std::memcpy(buf, &f, 4);
    out.append(buf, 4);
  }
  jsonio::write_file(path, out);
}

Corpus load_corpus(const std::filesystem::path& manifest_path) {
  if (!std::filesystem::exists(manifest_path)) {
    throw ValidationError("manifest_not_found",
                          "manifest does not exist: " + manifest_path.string());
  }
  const std::string raw = jsonio::read_file(manifest_path);
  const std::filesystem::path base = manifest_path.parent_path();

  Corpus corpus;
  std::set<std::string> seen_ids;
  std::istringstream lines(raw);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("bad_manifest_line",
                        manifest_path.string() + ":" + std::to_string(lineno) +
                            ": " + e.what());
    }
    ParticipantRecord rec;
    try {
      rec.id = j.at("id").get<std::string>();
      const auto labels = j.at("labels");
      if (!labels.is_array() || labels.size() != 8) {
        throw ValidationError("bad_labels",
                              "record " + rec.id + ": labels must be 8 ints");
      }
      for (std::size_t s = 0; s < 8; ++s) rec.labels[s] = labels[s].get<int>();
      rec.split = split_from_string(j.at("split").get<std::string>());
      const std::filesystem::path emb =
          base / j.at("embedding_path").get<std::string>();
      rec.segments = read_embedding_file(emb);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("bad_manifest_line",
                        manifest_path.string() + ":" + std::to_string(lineno) +
                            ": " + e.what());
    }
    rec.validate();
    if (!seen_ids.insert(rec.id).second) {
      throw ValidationError("duplicate_id",
                            "duplicate participant id: " + rec.id);
    }
    if (corpus.records.empty()) {
      corpus.embed_dim = rec.segments.cols;
    } else if (rec.segments.cols != corpus.embed_dim) {
      throw ValidationError(
          "dim_mismatch",
          "record " + rec.id + ": embedding dim " +
              std::to_string(rec.segments.cols) + " differs from corpus dim " +
              std::to_string(corpus.embed_dim));
    }
    corpus.records.push_back(std::move(rec));
  }
  if (corpus.records.empty()) {
    throw ValidationError("empty_corpus",
                          "manifest holds no records: " +
                              manifest_path.string());
  }
  return corpus;
}

void write_corpus_dir(const std::filesystem::path& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir / "embeddings");
  std::string manifest;
  for (const auto& rec : corpus.records) {
    const std::string rel = "embeddings/" + rec.id + ".sge1";
    write_embedding_file(dir / rel, rec.segments);
    jsonio::Writer w;
    w.begin_object();
    w.key("id").value(rec.id);
    w.key("embedding_path").value(rel);
    w.key("labels").begin_array();
    for (int l : rec.labels) w.value(l);
    w.end_array();
    w.key("split").value(split_name(rec.split));
    w.end_object();
    manifest += w.str();
    manifest += '\n';
  }
  jsonio::write_file(dir / "manifest.jsonl", manifest);
}

namespace {

std::filesystem::path names_sidecar(const std::filesystem::path& sge1_path) {
  std::filesystem::path p = sge1_path;
  p.replace_extension(".names.json");
  return p;
}

}  // namespace

QuerySet load_query_set(const std::filesystem::path& sge1_path) {
  QuerySet qs;
  qs.vectors = read_embedding_file(sge1_path);
  if (qs.vectors.rows != 8) {
    throw ValidationError("bad_query_set",
                          "query set must have 8 rows, found " +
                              std::to_string(qs.vectors.rows));
  }
  const auto sidecar = names_sidecar(sge1_path);
  if (!std::filesystem::exists(sidecar)) {
    throw ValidationError("query_names_not_found",
                          "missing names sidecar: " + sidecar.string());
  }
  const auto j = nlohmann::json::parse(jsonio::read_file(sidecar));
  const auto& arr = j.at("symptom_names");
  if (!arr.is_array() || arr.size() != 8) {
    throw FormatError("bad_query_names", "symptom_names must be 8 strings");
  }
  for (std::size_t s = 0; s < 8; ++s) qs.names[s] = arr[s].get<std::string>();
  return qs;
}

void write_query_set(const std::filesystem::path& sge1_path,
                     const QuerySet& qs) {
  write_embedding_file(sge1_path, qs.vectors);
  jsonio::Writer w;
  w.begin_object();
  w.key("symptom_names").begin_array();
  for (const auto& n : qs.names) w.value(n);
  w.end_array();
  w.end_object();
  jsonio::write_file(names_sidecar(sge1_path), w.str() + "\n");
}

namespace {

// Orthonormal signature rows via Gram-Schmidt over gaussian draws.
Matrix draw_signatures(Rng& rng, std::size_t d) {
  Matrix sig(8, d);
  for (std::size_t s = 0; s < 8; ++s) {
    for (std::size_t j = 0; j < d; ++j) sig.at(s, j) = rng.normal();
    for (std::size_t t = 0; t < s; ++t) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += sig.at(s, j) * sig.at(t, j);
      for (std::size_t j = 0; j < d; ++j) sig.at(s, j) -= dot * sig.at(t, j);
    }
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) norm += sig.at(s, j) * sig.at(s, j);
    norm = std::sqrt(norm);
    if (!(norm > 1e-12)) {
      throw NumericError("degenerate_signature",
                         "signature draw collapsed during orthogonalization");
    }
    for (std::size_t j = 0; j < d; ++j) sig.at(s, j) /= norm;
  }
  return sig;
}

// Evidence amplitude for symptom s at rank r among its planted segments.
// Items 2,3 (sleep, tired) spread weaker evidence over every planted
// segment; items 1,7 (depressed, psychomotor) put most of it in the first.
double planted_amplitude(std::size_t s, std::size_t rank, int label) {
  const double base = 1.0 + static_cast<double>(label);
  if (s == 2 || s == 3) return 0.7 * base;
  if (s == 1 || s == 7) return rank == 0 ? 1.5 * base : 0.4 * base;
  return base;
}

std::string padded_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%03zu", prefix, i);
  return buf;
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  if (spec.embed_dim < 8) {
    throw ValidationError("embed_dim_too_small",
                          "need embed_dim >= 8 for orthonormal symptom "
                          "signatures, got " +
                              std::to_string(spec.embed_dim));
  }
  if (spec.n_train == 0 || spec.n_dev == 0 || spec.n_test == 0) {
    throw ValidationError("empty_split", "every split size must be >= 1");
  }
  if (spec.n_min < 1 || spec.n_max < spec.n_min) {
    throw ValidationError("bad_segment_range", "need 1 <= n_min <= n_max");
  }

  SyntheticCorpus out;
  const std::size_t d = spec.embed_dim;

  Rng sig_rng = Rng::keyed(spec.seed, stream::synth, 1);
  out.signatures = draw_signatures(sig_rng, d);

  Rng query_rng = Rng::keyed(spec.seed, stream::synth, 2);
  out.queries.vectors = Matrix(8, d);
  for (std::size_t s = 0; s < 8; ++s) {
    for (std::size_t j = 0; j < d; ++j) {
      out.queries.vectors.at(s, j) =
          out.signatures.at(s, j) + 0.05 * spec.noise * query_rng.normal();
    }
    out.queries.names[s] = std::string(kSymptomNames[s]);
  }

  out.corpus.embed_dim = d;
  const std::size_t total = spec.n_train + spec.n_dev + spec.n_test;
  for (std::size_t pi = 0; pi < total; ++pi) {
    Rng rng = Rng::keyed(spec.seed, stream::synth, 3, pi);
    ParticipantRecord rec;
    if (pi < spec.n_train) {
      rec.split = Split::train;
      rec.id = padded_id("train", pi);
    } else if (pi < spec.n_train + spec.n_dev) {
      rec.split = Split::dev;
      rec.id = padded_id("dev", pi - spec.n_train);
    } else {
      rec.split = Split::test;
      rec.id = padded_id("test", pi - spec.n_train - spec.n_dev);
    }

    const std::size_t n = spec.n_min + rng.below(spec.n_max - spec.n_min + 1);
    for (std::size_t s = 0; s < 8; ++s) {
      rec.labels[s] = static_cast<int>(rng.below(4));
    }

    // ceil(y*N/12) planted segments per symptom, drawn without replacement
    // per symptom; overlaps across symptoms superpose their signals.
    std::array<std::vector<std::size_t>, 8> relevant;
    for (std::size_t s = 0; s < 8; ++s) {
      const std::size_t count =
          (static_cast<std::size_t>(rec.labels[s]) * n + 11) / 12;
      std::vector<std::size_t> pool(n);
      for (std::size_t i = 0; i < n; ++i) pool[i] = i;
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + rng.below(n - i);
        std::swap(pool[i], pool[j]);
      }
      relevant[s].assign(pool.begin(), pool.begin() + count);
      std::sort(relevant[s].begin(), relevant[s].end());
    }

    std::vector<bool> is_relevant(n, false);
    for (std::size_t s = 0; s < 8; ++s) {
      for (std::size_t idx : relevant[s]) is_relevant[idx] = true;
    }

    rec.segments = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      const double sigma = (is_relevant[i] ? 0.1 : 1.0) * spec.noise;
      double* row = rec.segments.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) row[j] = sigma * rng.normal();
    }
    for (std::size_t s = 0; s < 8; ++s) {
      for (std::size_t rank = 0; rank < relevant[s].size(); ++rank) {
        const double amp = planted_amplitude(s, rank, rec.labels[s]);
        double* row = rec.segments.row_ptr(relevant[s][rank]);
        const double* u = out.signatures.row_ptr(s);
        for (std::size_t j = 0; j < d; ++j) row[j] += amp * u[j];
      }
    }

    out.relevance[rec.id] = std::move(relevant);
    out.corpus.records.push_back(std::move(rec));
  }
  return out;
}

QuerySet pseudo_queries(std::uint64_t seed, std::size_t embed_dim) {
  if (embed_dim < 1) {
    throw ValidationError("embed_dim_too_small", "need embed_dim >= 1");
  }
  Rng rng = Rng::keyed(seed, stream::queries);
  QuerySet qs;
  qs.vectors = Matrix(8, embed_dim);
  for (std::size_t s = 0; s < 8; ++s) {
    double norm = 0.0;
    for (std::size_t j = 0; j < embed_dim; ++j) {
      const double v = rng.normal();
      qs.vectors.at(s, j) = v;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < embed_dim; ++j) qs.vectors.at(s, j) /= norm;
    qs.names[s] = std::string(kSymptomNames[s]);
  }
  return qs;
}

void write_relevance(const std::filesystem::path& path,
                     const RelevanceSets& rel) {
  jsonio::Writer w;
  w.begin_object();
  for (const auto& [id, sets] : rel) {
    w.key(id).begin_array();
    for (const auto& indices : sets) {
      w.begin_array();
      for (std::size_t idx : indices) {
        w.value(static_cast<std::uint64_t>(idx));
      }
      w.end_array();
    }
    w.end_array();
  }
  w.end_object();
  jsonio::write_file(path, w.str() + "\n");
}

RelevanceSets load_relevance(const std::filesystem::path& path) {
  RelevanceSets rel;
  const auto j = nlohmann::json::parse(jsonio::read_file(path));
  for (const auto& [id, sets] : j.items()) {
    if (!sets.is_array() || sets.size() != 8) {
      throw FormatError("bad_relevance", "relevance for " + id +
                                             " must hold 8 index lists");
    }
    std::array<std::vector<std::size_t>, 8> arr;
    for (std::size_t s = 0; s < 8; ++s) {
      for (const auto& v : sets[s]) arr[s].push_back(v.get<std::size_t>());
    }
    rel[id] = std::move(arr);
  }
  return rel;
}

}  // namespace sgca::data
