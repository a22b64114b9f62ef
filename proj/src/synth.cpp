#include "txflow/synth.hpp"

#include <random>
#include <string>

namespace txflow::synth {

namespace chr = std::chrono;

std::vector<ingest::TransferRecord> generate_records(const RecordFixtureParams& p) {
    std::mt19937_64 rng(p.seed);
    const std::size_t hubs_end = p.hubs, sources_end = hubs_end + p.sources, sinks_end = sources_end + p.sinks,
                      users = sinks_end + p.occasional;
    auto address = [&](std::size_t user, std::size_t j) {
        return "u" + std::to_string(user) + "a" + std::to_string(j % p.addresses_per_user);
    };
    auto pick = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi - 1)(rng);
    };
    auto amount = [&] { return Amount::from_satoshi(std::uniform_int_distribution<std::int64_t>(1000, 500'000'000)(rng)); };

    std::vector<ingest::TransferRecord> records;
    std::size_t tx = 0;
    auto emit = [&](chr::sys_days day, std::size_t from, std::size_t to, bool co_spend) {
        ingest::TransferRecord rec;
        rec.tx_id = "tx" + std::to_string(tx++);
        rec.timestamp = day + chr::seconds{std::uniform_int_distribution<int>(0, 86399)(rng)};
        if (co_spend) {
            for (std::size_t j = 0; j < p.addresses_per_user; ++j) rec.inputs.push_back(address(from, j));
        } else {
            rec.inputs.push_back(address(from, pick(0, p.addresses_per_user)));
        }
        // sinks never spend, so only one of their addresses is ever paid
        const bool sink = to >= sources_end && to < sinks_end;
        rec.outputs.push_back({address(to, sink ? 0 : pick(0, p.addresses_per_user)), amount()});
        if (pick(0, 3) == 0) rec.outputs.push_back({address(from, pick(0, p.addresses_per_user)), amount()});  // change
        records.push_back(std::move(rec));
    };

    Period span = Period::month(p.year, p.first_month);
    for (std::size_t m = 1; m < p.months; ++m) {
        chr::year_month_day next{chr::floor<chr::days>(span.end)};
        span.end = Period::month(static_cast<int>(next.year()), static_cast<unsigned>(next.month())).end;
    }
    for (auto day : span.days()) {
        for (std::size_t h = 0; h < hubs_end; ++h) {
            // ring edge keeps the hubs strongly connected every day
            emit(day, h, (h + 1) % p.hubs, true);
            for (std::size_t k = 1; k < p.payments_per_hub_per_day; ++k) {
                std::size_t to = pick(0, p.hubs);
                if (to == h) to = (h + 1) % p.hubs;
                emit(day, h, to, false);
            }
        }
        for (std::size_t s = hubs_end; s < sources_end; ++s) emit(day, s, pick(0, p.hubs), true);
        for (std::size_t s = sources_end; s < sinks_end; ++s) emit(day, pick(0, p.hubs), s, false);
        for (std::size_t o = sinks_end; o < users; ++o) {
            if (pick(0, 4) != 0) continue;
            if (pick(0, 2) == 0)
                emit(day, o, pick(0, p.hubs), true);
            else
                emit(day, pick(0, p.hubs), o, false);
        }
    }
    return records;
}

}  // namespace txflow::synth
