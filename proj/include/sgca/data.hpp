#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sgca/matrix.hpp"
#include "sgca/symptoms.hpp"

namespace sgca::data {

enum class Split { train, dev, test };

Split split_from_string(const std::string& s);
const char* split_name(Split s);

// One interview: N segment embeddings plus the 8 PHQ-8 item scores.
struct ParticipantRecord {
  std::string id;
  Matrix segments;  // N x d_k
  std::array<int, 8> labels{};
  Split split = Split::train;

  int total_label() const;
  std::array<double, 8> labels_d() const;
  void validate() const;
};

struct Corpus {
  std::vector<ParticipantRecord> records;
  std::size_t embed_dim = 0;

  std::size_t split_size(Split s) const;
  // pointers sorted by participant id, for deterministic evaluation order
  std::vector<const ParticipantRecord*> split_records(Split s) const;
};

struct QuerySet {
  Matrix vectors;  // 8 x d_k
  std::array<std::string, 8> names;
};

// ---- SGE1 embedding files ------------------------------------------------
// magic "SGE1", u32le rows, u32le cols, then rows*cols float32le row-major.
Matrix read_embedding_file(const std::filesystem::path& path);
void write_embedding_file(const std::filesystem::path& path, const Matrix& m);

// ---- corpus manifests ------------------------------------------------------
// JSON lines, one record per line:
//   {"id": ..., "embedding_path": ..., "labels": [8 ints], "split": ...}
// embedding_path is resolved relative to the manifest's directory.
Corpus load_corpus(const std::filesystem::path& manifest_path);

// Writes embeddings/<id>.sge1 plus manifest.jsonl under dir.
void write_corpus_dir(const std::filesystem::path& dir, const Corpus& corpus);

QuerySet load_query_set(const std::filesystem::path& sge1_path);
void write_query_set(const std::filesystem::path& sge1_path,
                     const QuerySet& qs);

// ---- synthetic oracle corpus ----------------------------------------------

// participant id -> per-symptom sorted list of planted segment indices
using RelevanceSets =
    std::map<std::string, std::array<std::vector<std::size_t>, 8>>;

struct SyntheticSpec {
  std::uint64_t seed = 0;
  std::size_t n_train = 48;
  std::size_t n_dev = 16;
  std::size_t n_test = 16;
  std::size_t embed_dim = 64;
  std::size_t n_min = 20;
  std::size_t n_max = 120;
  double noise = 1.0;  // multiplies every noise sigma; 0 gives the exact
                       // label-recovery oracle corpus
};

struct SyntheticCorpus {
  Corpus corpus;
  QuerySet queries;
  RelevanceSets relevance;
  Matrix signatures;  // 8 x d_k orthonormal symptom directions
};

// Per participant draws N in [n_min, n_max] and labels y_s in {0..3}, then
// plants ceil(y_s * N / 12) relevant segments per symptom. A segment relevant
// to several symptoms superposes their signature signals. Evidence dispersion
// varies by symptom: items 2 and 3 spread weaker evidence over all planted
// segments, items 1 and 7 concentrate it in the first one.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

// 8 deterministic unit-norm pseudo-random query vectors.
QuerySet pseudo_queries(std::uint64_t seed, std::size_t embed_dim);

void write_relevance(const std::filesystem::path& path,
                     const RelevanceSets& rel);
RelevanceSets load_relevance(const std::filesystem::path& path);

}  // namespace sgca::data
