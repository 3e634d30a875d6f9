#include "loosepack/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <tuple>

#include "loosepack/loose.hpp"
#include "loosepack/simd/kernels.hpp"

namespace loosepack {

bool operator==(const QueryRecord& a, const QueryRecord& b) {
    const bool same_cand = a.candidate == b.candidate || (a.candidate && b.candidate && *a.candidate == *b.candidate);
    return a.round == b.round && a.step == b.step && a.rep == b.rep && a.prob == b.prob && a.hits == b.hits &&
           same_cand;
}

void QueryLedger::append(QueryRecord rec, std::uint64_t cap) {
    if (!rec.candidate) throw Error("query record without a candidate set");
    if (!(rec.prob >= 0.0 && rec.prob <= 1.0)) throw Error("query probability outside [0,1]");
    if (rec.rep == 0 || rec.rep > cap) {
        throw Error("repetition " + std::to_string(rec.rep) + " outside [1, cap]");
    }
    if (!records_.empty()) {
        const auto& last = records_.back();
        if (std::tie(rec.round, rec.step, rec.rep) <= std::tie(last.round, last.step, last.rep)) {
            throw Error("query records must be strictly ordered by (round, step, repetition)");
        }
    }
    auto [it, fresh] = reps_.try_emplace(rec.key(), 0);
    if (rec.rep != it->second + 1) throw Error("repetitions within a step must be consecutive from 1");
    for (const auto& h : rec.hits) {
        if (!rec.candidate->contains(h)) throw Error("hit " + h.to_string() + " is not a candidate member");
    }
    it->second = rec.rep;
    factors_.push_back(1.0 - rec.prob);
    log_factors_.push_back(std::log1p(-rec.prob));
    min_prob_ = std::min(min_prob_, rec.prob);
    records_.push_back(std::move(rec));
}

std::uint32_t QueryLedger::repetitions(std::uint32_t round, std::uint32_t step) const {
    auto it = reps_.find({round, step});
    return it == reps_.end() ? 0 : it->second;
}

std::vector<KTuple> QueryLedger::colored() const {
    std::vector<KTuple> out;
    for (const auto& r : records_) out.insert(out.end(), r.hits.begin(), r.hits.end());
    std::sort(out.begin(), out.end(), colex_less);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

nlohmann::json QueryLedger::record_json(std::size_t index) const {
    const auto& r = records_.at(index);
    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : r.hits) hits.push_back(tuple_to_json(h));
    return {{"i", r.round}, {"j", r.step}, {"t", r.rep}, {"cand", to_json(*r.candidate)}, {"p", r.prob},
            {"hits", std::move(hits)}};
}

void QueryLedger::write_jsonl(std::ostream& os) const {
    for (std::size_t i = 0; i < records_.size(); ++i) os << record_json(i).dump() << '\n';
}

QueryLedger QueryLedger::read_jsonl(std::istream& is) {
    QueryLedger ledger;
    std::string line;
    CandidateRef previous;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        QueryRecord rec;
        rec.round = j.at("i").get<std::uint32_t>();
        rec.step = j.at("j").get<std::uint32_t>();
        rec.rep = j.at("t").get<std::uint32_t>();
        auto cand = candidate_from_json(j.at("cand"));
        // repetitions of one step share their descriptor
        if (previous && *previous == cand) {
            rec.candidate = previous;
        } else {
            rec.candidate = std::make_shared<const CandidateSet>(std::move(cand));
        }
        previous = rec.candidate;
        rec.prob = j.at("p").get<double>();
        for (const auto& h : j.at("hits")) rec.hits.push_back(tuple_from_json(h));
        ledger.append(std::move(rec));
    }
    return ledger;
}

std::vector<std::uint8_t> membership_mask(const QueryLedger& ledger, const KTuple& e, std::size_t prefix) {
    const auto records = ledger.records();
    const std::size_t count = std::min(prefix, records.size());
    std::vector<std::uint8_t> mask(count, 0);
    const CandidateSet* last = nullptr;
    bool last_member = false;
    for (std::size_t i = 0; i < count; ++i) {
        const CandidateSet* c = records[i].candidate.get();
        if (c != last) {
            last = c;
            last_member = c->contains(e);
        }
        mask[i] = last_member;
    }
    return mask;
}

double replay_mass(const QueryLedger& ledger, const KTuple& e, std::size_t prefix,
                   const simd::KernelTable& k) {
    const auto mask = membership_mask(ledger, e, prefix);
    if (ledger.min_prob() < kLogSpaceThreshold) {
        const double log_survival = k.masked_sum(ledger.log_survival_factors().first(mask.size()), mask);
        return -std::expm1(log_survival);
    }
    return 1.0 - k.masked_product(ledger.survival_factors().first(mask.size()), mask);
}

double linear_mass(const QueryLedger& ledger, const KTuple& e) {
    const auto mask = membership_mask(ledger, e, ledger.size());
    double total = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) total += ledger.records()[i].prob;
    }
    return total;
}

}  // namespace loosepack
