#include "erarag/metrics.hpp"

#include <chrono>
#include <sstream>

namespace erarag {

namespace {

std::int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::build: return "build";
        case Phase::update: return "update";
        case Phase::query: return "query";
    }
    return "?";
}

void CostLedger::begin_phase(Phase p) {
    if (active_) throw UsageError("begin_phase: a phase is already open");
    active_ = p;
    phase_start_ms_ = now_ms();
    touched_[static_cast<int>(p)] = true;
}

void CostLedger::end_phase() {
    if (!active_) throw UsageError("end_phase: no phase open");
    auto& c = totals_[static_cast<int>(*active_)];
    c.wall_ms += static_cast<std::uint64_t>(now_ms() - phase_start_ms_);
    active_.reset();
}

void CostLedger::record(CostEvent event, const TokenUsage& usage, int layer) {
    if (!active_) throw UsageError("record: no phase open");
    auto apply = [&](Counters& c) {
        if (event == CostEvent::embed) {
            c.embed_calls += 1;
        } else {
            c.llm_calls += 1;
        }
        c.prompt_tokens += usage.prompt_tokens;
        c.completion_tokens += usage.completion_tokens;
    };
    int pi = static_cast<int>(*active_);
    apply(totals_[pi]);
    if (layer >= 0) apply(per_layer_[pi][layer]);
}

const CostLedger::Counters& CostLedger::phase_totals(Phase p) const {
    return totals_[static_cast<int>(p)];
}

const std::map<int, CostLedger::Counters>& CostLedger::layer_totals(Phase p) const {
    return per_layer_[static_cast<int>(p)];
}

std::string CostLedger::report(const std::string& format) const {
    std::ostringstream out;
    auto row = [](const Counters& c) {
        std::ostringstream r;
        r << c.llm_calls << ',' << c.prompt_tokens << ',' << c.completion_tokens << ','
          << c.embed_calls << ',' << c.wall_ms;
        return r.str();
    };
    if (format == "csv") {
        out << "phase,layer,llm_calls,prompt_tokens,completion_tokens,embed_calls,wall_ms\n";
        bool any = false;
        for (Phase p : {Phase::build, Phase::update, Phase::query}) {
            int pi = static_cast<int>(p);
            if (!touched_[pi]) continue;
            any = true;
            out << phase_name(p) << ",all," << row(totals_[pi]) << '\n';
            for (const auto& [layer, c] : per_layer_[pi])
                out << phase_name(p) << ',' << layer << ',' << row(c) << '\n';
        }
        if (!any) out << "none,all,0,0,0,0,0\n";
    } else {
        out << "phase      llm_calls  prompt_tok  compl_tok  embeds  wall_ms\n";
        for (Phase p : {Phase::build, Phase::update, Phase::query}) {
            int pi = static_cast<int>(p);
            const auto& c = totals_[pi];
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%-10s %9llu %11llu %10llu %7llu %8llu\n",
                          phase_name(p),
                          (unsigned long long)c.llm_calls,
                          (unsigned long long)c.prompt_tokens,
                          (unsigned long long)c.completion_tokens,
                          (unsigned long long)c.embed_calls,
                          (unsigned long long)c.wall_ms);
            out << buf;
        }
    }
    return out.str();
}

}  // namespace erarag
