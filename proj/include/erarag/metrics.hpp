#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "erarag/common.hpp"

namespace erarag {

struct TokenUsage {
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;

    TokenUsage& operator+=(const TokenUsage& o) {
        prompt_tokens += o.prompt_tokens;
        completion_tokens += o.completion_tokens;
        return *this;
    }
    std::uint64_t total() const { return prompt_tokens + completion_tokens; }
    bool operator==(const TokenUsage&) const = default;
};

enum class Phase { build, update, query };
enum class CostEvent { embed, summarize, generate };

const char* phase_name(Phase p);

// Exact per-phase counters of provider calls and tokens. Wall time is
// recorded for reporting but never asserted in tests.
class CostLedger {
public:
    struct Counters {
        std::uint64_t llm_calls = 0;
        std::uint64_t prompt_tokens = 0;
        std::uint64_t completion_tokens = 0;
        std::uint64_t embed_calls = 0;
        std::uint64_t wall_ms = 0;
    };

    void begin_phase(Phase p);
    void end_phase();
    std::optional<Phase> active_phase() const { return active_; }

    // layer < 0 means "no layer tag"
    void record(CostEvent event, const TokenUsage& usage, int layer = -1);

    const Counters& phase_totals(Phase p) const;
    const std::map<int, Counters>& layer_totals(Phase p) const;

    // format: "table" or "csv". CSV schema:
    //   phase,layer,llm_calls,prompt_tokens,completion_tokens,embed_calls,wall_ms
    std::string report(const std::string& format) const;

private:
    std::optional<Phase> active_;
    std::int64_t phase_start_ms_ = 0;
    std::array<Counters, 3> totals_{};
    std::array<std::map<int, Counters>, 3> per_layer_{};
    std::array<bool, 3> touched_{};
};

}  // namespace erarag
