#include "recall/problem_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <vector>

#include "recall/errors.hpp"

namespace recall {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        fields.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return fields;
}

std::int64_t parse_count(std::string_view field, const char* what, std::size_t line) {
    std::int64_t value = 0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
        throw ParseError(std::string("invalid ") + what + " '" + std::string(field) + "'", line);
    }
    if (value < 0) {
        throw ParseError(std::string(what) + " must be nonnegative", line);
    }
    return value;
}

}  // namespace

RecallProblem read_problem_csv(std::istream& in) {
    RecallProblem problem;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        const auto fields = split(text, ',');
        if (!header_seen) {
            const std::vector<std::string_view> expected{"segment", "stratum", "population",
                                                         "sample", "relevant"};
            if (fields != expected) {
                throw ParseError("expected header 'segment,stratum,population,sample,relevant'",
                                 line_no);
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 5) {
            throw ParseError("expected 5 fields, found " + std::to_string(fields.size()), line_no);
        }
        StratumCounts stratum;
        stratum.name = std::string(fields[1]);
        stratum.population = parse_count(fields[2], "population", line_no);
        stratum.sample = parse_count(fields[3], "sample", line_no);
        stratum.relevant = parse_count(fields[4], "relevant", line_no);
        if (fields[0] == "retrieved") {
            problem.retrieved.strata.push_back(std::move(stratum));
        } else if (fields[0] == "unretrieved") {
            problem.unretrieved.strata.push_back(std::move(stratum));
        } else {
            throw ParseError("segment must be 'retrieved' or 'unretrieved', got '" +
                                 std::string(fields[0]) + "'",
                             line_no);
        }
    }
    if (!header_seen) {
        throw ParseError("missing header", line_no + 1);
    }
    problem.validate();
    return problem;
}

RecallProblem read_problem_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    return read_problem_csv(in);
}

void write_problem_csv(std::ostream& out, const RecallProblem& problem) {
    out << "segment,stratum,population,sample,relevant\n";
    for (const auto* segment : {&problem.retrieved, &problem.unretrieved}) {
        std::size_t index = 0;
        for (const auto& s : segment->strata) {
            const std::string name = s.name.empty() ? std::to_string(index) : s.name;
            out << to_string(segment->label) << ',' << name << ',' << s.population << ','
                << s.sample << ',' << s.relevant << '\n';
            ++index;
        }
    }
}

StratumCounts parse_stratum_triple(std::string_view text) {
    const auto fields = split(text, ',');
    if (fields.size() != 3) {
        throw ParseError("expected N,n,r", 1);
    }
    StratumCounts s;
    s.population = parse_count(fields[0], "population", 1);
    s.sample = parse_count(fields[1], "sample", 1);
    s.relevant = parse_count(fields[2], "relevant", 1);
    s.validate();
    return s;
}

void write_distribution_csv(std::ostream& out, const SamplingDistribution& dist) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << "estimate,probability\n" << std::setprecision(17);
    for (const auto& o : dist.outcomes) {
        out << o.estimate << ',' << o.probability << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

}  // namespace recall
