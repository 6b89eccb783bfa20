#include "coherence/state_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "coherence/errors.hpp"

namespace coherence {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Reads "key: value" from the next non-empty line.
std::string header_field(std::istream& in, int& line_no, const std::string& key) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        const size_t colon = t.find(':');
        if (colon == std::string::npos)
            throw parse_error(line_no, "expected '" + key + ": ...' header");
        const std::string k = trim(t.substr(0, colon));
        if (k != key)
            throw parse_error(line_no, "expected header '" + key + "', found '" + k + "'");
        return trim(t.substr(colon + 1));
    }
    throw parse_error(line_no + 1, "missing '" + key + ":' header");
}

cplx parse_pair(const std::string& token, int line_no) {
    const size_t comma = token.find(',');
    if (comma == std::string::npos)
        throw parse_error(line_no, "expected 're,im' pair, found '" + token + "'");
    try {
        size_t used = 0;
        const double re = std::stod(token.substr(0, comma), &used);
        if (used != comma) throw std::invalid_argument("trailing");
        const std::string imtok = token.substr(comma + 1);
        const double im = std::stod(imtok, &used);
        if (used != imtok.size()) throw std::invalid_argument("trailing");
        return {re, im};
    } catch (const std::exception&) {
        throw parse_error(line_no, "malformed number in pair '" + token + "'");
    }
}

// Pulls exactly `count` pairs from the stream, tracking line numbers.
std::vector<cplx> read_pairs(std::istream& in, int& line_no, size_t count) {
    std::vector<cplx> out;
    out.reserve(count);
    std::string line;
    while (out.size() < count && std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string token;
        while (ls >> token) {
            if (out.size() == count)
                throw parse_error(line_no, "more entries than dim declares");
            out.push_back(parse_pair(token, line_no));
        }
    }
    if (out.size() < count)
        throw parse_error(line_no + 1, "expected " + std::to_string(count) + " entries, found " +
                                           std::to_string(out.size()));
    // Anything left must be whitespace.
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty())
            throw parse_error(line_no, "unexpected trailing content");
    }
    return out;
}

} // namespace

StateFile read_state(std::istream& in) {
    int line_no = 0;
    const std::string kind = header_field(in, line_no, "kind");
    if (kind != "pure" && kind != "density")
        throw parse_error(line_no, "kind must be 'pure' or 'density', found '" + kind + "'");
    const std::string dim_s = header_field(in, line_no, "dim");
    int n = 0;
    try {
        size_t used = 0;
        n = std::stoi(dim_s, &used);
        if (used != dim_s.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw parse_error(line_no, "dim must be an integer, found '" + dim_s + "'");
    }
    if (n < 1) throw parse_error(line_no, "dim must be >= 1");

    if (kind == "pure") {
        std::vector<cplx> amp = read_pairs(in, line_no, static_cast<size_t>(n));
        return PureState(std::move(amp));
    }
    std::vector<cplx> entries = read_pairs(in, line_no, static_cast<size_t>(n) * n);
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = entries[static_cast<size_t>(i) * n + j];
    return DensityMatrix(HermitianMatrix(std::move(m)));
}

StateFile read_state_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error(0, "cannot open '" + path + "'");
    return read_state(in);
}

namespace {
std::string pair_str(const cplx& z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", z.real(), z.imag());
    return buf;
}
} // namespace

std::string format_state(const PureState& x) {
    std::ostringstream out;
    out << "kind: pure\n"
        << "dim: " << x.dim() << "\n";
    for (int j = 0; j < x.dim(); ++j) out << pair_str(x[j]) << "\n";
    return out.str();
}

std::string format_state(const DensityMatrix& rho) {
    std::ostringstream out;
    out << "kind: density\n"
        << "dim: " << rho.dim() << "\n";
    for (int i = 0; i < rho.dim(); ++i) {
        for (int j = 0; j < rho.dim(); ++j) {
            if (j) out << ' ';
            out << pair_str(rho(i, j));
        }
        out << "\n";
    }
    return out.str();
}

void write_state_file(const std::string& path, const StateFile& state) {
    std::ofstream out(path);
    if (!out) throw parse_error(0, "cannot open '" + path + "' for writing");
    std::visit([&](const auto& s) { out << format_state(s); }, state);
}

std::string csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace coherence
