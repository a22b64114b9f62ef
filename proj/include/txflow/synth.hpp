#pragma once

#include <cstdint>
#include <vector>

#include "txflow/ingest.hpp"

namespace txflow::synth {

/// Synthetic transaction stream with a planted bow-tie: "source" users pay
/// into a strongly connected set of "hub" users, hubs pay each other and
/// "sink" users, and occasional users appear on random days. Hubs, sources
/// and sinks are active every day, so they are regular users. Each user owns
/// several addresses which are co-spent on the first payment of every day.
struct RecordFixtureParams {
    std::size_t hubs = 12;
    std::size_t sources = 4;
    std::size_t sinks = 6;
    std::size_t occasional = 10;
    std::size_t addresses_per_user = 3;
    int year = 2019;
    unsigned first_month = 1;
    std::size_t months = 2;
    std::size_t payments_per_hub_per_day = 3;
    std::uint64_t seed = 7;
};

std::vector<ingest::TransferRecord> generate_records(const RecordFixtureParams& params);

}  // namespace txflow::synth
