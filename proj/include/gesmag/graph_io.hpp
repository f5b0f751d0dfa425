#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "gesmag/errors.hpp"
#include "gesmag/graph.hpp"

namespace gesmag {

namespace detail {

inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline int parse_int(const std::string& s, int line_no) {
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": expected an integer, got '" + s + "'");
    }
}

// Edge symbol <-> (mark at left vertex, mark at right vertex).
struct Symbol {
    const char* text;
    Mark left;
    Mark right;
};

inline constexpr Symbol kSymbols[] = {
    {"->", Mark::Tail, Mark::Arrow},     {"<->", Mark::Arrow, Mark::Arrow}, {"--", Mark::Tail, Mark::Tail},
    {"o->", Mark::Circle, Mark::Arrow},  {"o-o", Mark::Circle, Mark::Circle}, {"o--", Mark::Circle, Mark::Tail},
    {"<-", Mark::Arrow, Mark::Tail},     {"<-o", Mark::Arrow, Mark::Circle}, {"--o", Mark::Tail, Mark::Circle},
};

// The six written forms; the last three entries above are accepted on input only.
inline constexpr int kWrittenSymbols = 6;

}  // namespace detail

/// Serializes in the canonical text form: header, then one edge per line sorted by
/// (min endpoint, max endpoint). Asymmetric edges are written so that the symbol is one of
/// `->`, `o->`, `o--`; symmetric ones list the smaller id first.
inline std::string to_text(const MixedGraph& g) {
    std::ostringstream out;
    out << "vertices: " << g.n() << "\n";
    for (const Edge& e : g.edges()) {
        VertexId left = e.a, right = e.b;
        Mark ml = e.at_a, mr = e.at_b;
        const char* sym = nullptr;
        for (int flip = 0; flip < 2 && sym == nullptr; ++flip) {
            for (int s = 0; s < detail::kWrittenSymbols; ++s) {
                if (detail::kSymbols[s].left == ml && detail::kSymbols[s].right == mr) {
                    sym = detail::kSymbols[s].text;
                    break;
                }
            }
            if (sym == nullptr) {
                std::swap(left, right);
                std::swap(ml, mr);
            }
        }
        out << left << " " << sym << " " << right << "\n";
    }
    return out.str();
}

/// Kind is inferred: any circle mark makes a PAG, otherwise MAG when ancestral and maximal,
/// else ADMG.
inline MixedGraph parse_graph(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    int n = -1;
    std::vector<std::tuple<int, int, Mark, Mark, int>> pending;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = detail::trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        if (n < 0) {
            const std::string key = "vertices:";
            if (line.rfind(key, 0) != 0) throw ParseError("line " + std::to_string(line_no) + ": missing 'vertices: n' header");
            n = detail::parse_int(detail::trim(line.substr(key.size())), line_no);
            if (n < 0 || n > kMaxVertices) throw ParseError("vertex count out of range");
            continue;
        }
        std::istringstream ls(line);
        std::string a, sym, b, extra;
        if (!(ls >> a >> sym >> b) || (ls >> extra)) {
            throw ParseError("line " + std::to_string(line_no) + ": expected '<a> <edge> <b>'");
        }
        const detail::Symbol* found = nullptr;
        for (const auto& s : detail::kSymbols) {
            if (sym == s.text) found = &s;
        }
        if (found == nullptr) throw ParseError("line " + std::to_string(line_no) + ": unknown edge symbol '" + sym + "'");
        pending.emplace_back(detail::parse_int(a, line_no), detail::parse_int(b, line_no), found->left, found->right, line_no);
    }
    if (n < 0) throw ParseError("empty graph file: missing 'vertices: n' header");
    MixedGraph g(n);
    for (auto [a, b, ml, mr, ln] : pending) {
        if (a < 0 || a >= n || b < 0 || b >= n || a == b) throw ParseError("line " + std::to_string(ln) + ": bad endpoints");
        if (g.adjacent(a, b)) throw ParseError("line " + std::to_string(ln) + ": duplicate edge");
        g.set_edge(a, b, ml, mr);
    }
    if (g.has_circles()) {
        g.set_kind(GraphKind::Pag);
    } else if (is_acyclic(g) && is_ancestral(g) && is_maximal(g)) {
        g.set_kind(GraphKind::Mag);
    } else {
        g.set_kind(GraphKind::Admg);
    }
    return g;
}

inline MixedGraph read_graph_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open graph file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_graph(ss.str());
}

inline void write_graph_file(const std::string& path, const MixedGraph& g) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write graph file: " + path);
    f << to_text(g);
}

}  // namespace gesmag
