#include "qdtl/ledger.hpp"

#include <ostream>

namespace qdtl {

void QueryLedger::write_csv(std::ostream& out) const {
    out << "tag,count\n";
    for (const auto& [tag, count] : counters_) {
        out << tag << "," << count << "\n";
    }
}

}  // namespace qdtl
