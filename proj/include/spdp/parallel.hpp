#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spdp/count_state.hpp"
#include "spdp/corpus.hpp"
#include "spdp/sampler.hpp"

namespace spdp {

enum class MergeMode { shared, delta };

MergeMode parse_merge_mode(const std::string& text);
std::string to_string(MergeMode mode);

struct ParallelOptions {
    unsigned workers = 1;  // worker threads per device
    unsigned devices = 1;
    std::size_t wave_budget = std::size_t{1} << 20;  // positions per wave, all devices together
    MergeMode merge = MergeMode::shared;
};

/// One wave: for every device, a contiguous range of its sub-schedule.
struct Wave {
    std::vector<std::size_t> begin;  // per device
    std::vector<std::size_t> end;
};

/// Static schedule of the parallel sampler.
///
/// schedule           every position once, round-robin over documents
/// device_of_doc      device owning each document
/// device_schedule    per device, (schedule index, position) in schedule order
/// waves              ranges into device_schedule; each wave holds at most
///                    wave_budget positions over all devices
struct WorkPlan {
    struct Slot {
        std::uint32_t index;     // index into `schedule`, keys the random stream
        std::uint32_t position;
    };

    std::vector<std::uint32_t> schedule;
    std::vector<std::uint32_t> device_of_doc;
    std::vector<std::vector<Slot>> device_schedule;
    std::vector<Wave> waves;
    std::size_t wave_budget = 0;
    std::size_t workgroup_size = 0;  // K * (S_max + 1) logical slots per word

    std::size_t num_devices() const { return device_schedule.size(); }
};

/// Round-robin word order: offset 0 of every document (group-major, then
/// document order), then offset 1 of every document that long, and so on.
std::vector<std::uint32_t> reorder_words(const Corpus& corpus);

/// Random document-to-device assignment, greedily balanced by word count so
/// device totals differ by at most the longest document.
std::vector<std::uint32_t> partition_documents(const Corpus& corpus, unsigned devices, std::uint64_t seed);

WorkPlan make_plan(const Corpus& corpus, std::size_t topics, std::size_t max_row_nonzeros,
                   const ParallelOptions& options, std::uint64_t seed);

struct CorrectionReport {
    std::size_t doc_topic_fixed = 0;     // n cells regenerated to a new value
    std::size_t customers_fixed = 0;     // m cells regenerated to a new value
    std::size_t tables_raised = 0;       // t below min(1, m)
    std::size_t tables_lowered = 0;      // t above m
    std::size_t lists_resized = 0;       // table lists truncated or padded to t
    std::size_t sums_fixed = 0;          // cached sums and base counts rewritten
    std::size_t indicators_flipped = 0;

    std::size_t total() const {
        return doc_topic_fixed + customers_fixed + tables_raised + tables_lowered + lists_resized + sums_fixed +
               indicators_flipped;
    }
    CorrectionReport& operator+=(const CorrectionReport& other);
};

/// Regenerates n and m from z, clamps t into [min(1, m), m], resizes table
/// lists to t (padding with the row's heaviest dish, i.e. w under the
/// identity), recomputes q and every cached sum from the lists, and
/// reconciles the r indicators. Leaves the state consistent.
CorrectionReport error_correct(CountState& state, const TransformMatrix& transform);

/// Additive merge of per-device table counts:
/// merged = before + sum_g (device_g - before). No clamping.
std::vector<std::int32_t> merge_device_tables(const std::vector<std::int32_t>& before,
                                              const std::vector<std::vector<std::int32_t>>& devices);

/// Count arrays as the workers see them. All mutation goes through
/// single-cell atomic adds; reads are relaxed loads that may be stale.
struct SharedCounts {
    std::vector<std::int32_t> n, m, t, m_sum, t_sum, base_tables, topic_tables;

    static SharedCounts from(const CountState& state);

    static std::int32_t load(const std::vector<std::int32_t>& v, std::size_t idx) {
        return std::atomic_ref<std::int32_t>(const_cast<std::int32_t&>(v[idx])).load(std::memory_order_relaxed);
    }
    static void add(std::vector<std::int32_t>& v, std::size_t idx, std::int32_t delta) {
        std::atomic_ref<std::int32_t>(v[idx]).fetch_add(delta, std::memory_order_relaxed);
    }
};

/// One iteration of the approximate parallel sampler (identity transform
/// only). Devices run concurrently, each with `workers` threads pulling
/// positions from its wave range; after every wave t is merged according to
/// the merge mode and error_correct restores consistency. Each position
/// reads a local copy of its counts clamped back into the relations exact
/// counts satisfy (tables within [min(1, m), m], sums at least their parts,
/// base tables at least the cell's tables), so stale reads never yield an
/// impossible state.
CorrectionReport run_parallel_iteration(CountState& state, const WorkPlan& plan, const SamplerContext& ctx,
                                        unsigned workers, MergeMode merge, std::uint64_t seed,
                                        std::uint64_t iteration);

}  // namespace spdp
