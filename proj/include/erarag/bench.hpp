#pragma once

#include <string>
#include <vector>

#include "erarag/update.hpp"

namespace erarag {

// One measured stage of a growth protocol. Stage 0 is the initial build;
// stages 1..N are insertions (incremental) or full rebuilds (baseline).
struct BenchRow {
    std::string strategy;  // "incremental" or "rebuild"
    std::uint32_t stage = 0;
    std::uint64_t llm_calls = 0;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    std::uint64_t embed_calls = 0;
    std::uint64_t wall_ms = 0;
};

// 50% of the chunks build the initial graph; the rest arrives in ten equal
// insertion rounds. The rebuild baseline reconstructs the graph from the
// cumulative corpus at every stage.
std::vector<BenchRow> bench_half_plus_ten(const Corpus& corpus, const BuildConfig& config,
                                          bool run_incremental, bool run_rebuild);

// Initial build on half the corpus, then a single one-document insertion,
// compared against one full rebuild over the grown corpus.
std::vector<BenchRow> bench_one_entry(const Corpus& corpus, const BuildConfig& config,
                                      bool run_incremental, bool run_rebuild);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace erarag
