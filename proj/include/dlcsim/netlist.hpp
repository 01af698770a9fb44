#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dlcsim/devmodel.hpp"
#include "dlcsim/errors.hpp"
#include "dlcsim/si.hpp"

namespace dlcsim {

// ---------------------------------------------------------------------------
// Data model
// ---------------------------------------------------------------------------

struct Dc {
    double volts = 0.0;
    bool operator==(const Dc&) const = default;
};

struct Pulse {
    double v1 = 0.0;
    double v2 = 0.0;
    double delay_s = 0.0;
    double rise_s = 0.0;
    double fall_s = 0.0;
    double width_s = 0.0;
    double period_s = 0.0;
    bool operator==(const Pulse&) const = default;
};

struct Pwl {
    std::vector<std::pair<double, double>> points;  // (time_s, volts), strictly increasing times
    bool operator==(const Pwl&) const = default;
};

using Waveform = std::variant<Dc, Pulse, Pwl>;

struct Mosfet {
    std::string name;
    std::string drain, gate, source, bulk;
    std::string model;
    double width_m = 0.0;
    double length_m = 0.0;
    bool operator==(const Mosfet&) const = default;
};

struct Resistor {
    std::string name;
    std::string n1, n2;
    double ohms = 0.0;
    bool operator==(const Resistor&) const = default;
};

struct Capacitor {
    std::string name;
    std::string n1, n2;
    double farads = 0.0;
    bool operator==(const Capacitor&) const = default;
};

struct VSource {
    std::string name;
    std::string npos, nneg;
    Waveform waveform = Dc{};
    bool operator==(const VSource&) const = default;
};

using Device = std::variant<Mosfet, Resistor, Capacitor, VSource>;

inline const std::string& device_name(const Device& d) {
    return std::visit([](const auto& e) -> const std::string& { return e.name; }, d);
}

struct Tran {
    double tstop_s = 0.0;
    double tstep_max_s = 0.0;
    bool operator==(const Tran&) const = default;
};

struct Op {
    bool operator==(const Op&) const = default;
};

using AnalysisDirective = std::variant<Tran, Op>;

/// Ground is always node "0".
inline constexpr const char* kGroundNode = "0";

struct Netlist {
    std::string title;
    std::vector<Device> devices;
    std::map<std::string, ModelCard> models;
    std::vector<AnalysisDirective> directives;

    bool operator==(const Netlist&) const = default;

    /// All node names: ground first, then first-appearance order over device
    /// terminals.
    std::vector<std::string> node_names() const {
        std::vector<std::string> names{kGroundNode};
        auto add = [&](const std::string& n) {
            if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
        };
        for (const auto& dev : devices) {
            std::visit(
                [&](const auto& e) {
                    using T = std::decay_t<decltype(e)>;
                    if constexpr (std::is_same_v<T, Mosfet>) {
                        add(e.drain); add(e.gate); add(e.source); add(e.bulk);
                    } else if constexpr (std::is_same_v<T, VSource>) {
                        add(e.npos); add(e.nneg);
                    } else {
                        add(e.n1); add(e.n2);
                    }
                },
                dev);
        }
        return names;
    }

    const Device* find_device(std::string_view name) const {
        for (const auto& d : devices)
            if (device_name(d) == name) return &d;
        return nullptr;
    }

    Device* find_device(std::string_view name) {
        for (auto& d : devices)
            if (device_name(d) == name) return &d;
        return nullptr;
    }

    std::optional<Tran> tran_directive() const {
        for (const auto& dir : directives)
            if (const auto* t = std::get_if<Tran>(&dir)) return *t;
        return std::nullopt;
    }

    /// Enforce the structural invariants; throws Error on violation.
    void validate() const {
        std::vector<std::string> seen;
        bool touches_ground = devices.empty();
        for (const auto& dev : devices) {
            const std::string& name = device_name(dev);
            if (name.empty()) throw Error("device with empty name");
            if (std::find(seen.begin(), seen.end(), name) != seen.end())
                throw Error("duplicate device name: " + name);
            seen.push_back(name);
            const char kind = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
            std::visit(
                [&](const auto& e) {
                    using T = std::decay_t<decltype(e)>;
                    if constexpr (std::is_same_v<T, Mosfet>) {
                        if (kind != 'M') throw Error(name + ": MOSFET name must start with M");
                        if (e.width_m <= 0 || e.length_m <= 0)
                            throw Error(name + ": nonpositive device dimensions");
                        if (!models.count(e.model))
                            throw Error(name + ": undefined model " + e.model);
                        for (const auto* n : {&e.drain, &e.gate, &e.source, &e.bulk})
                            if (*n == kGroundNode) touches_ground = true;
                    } else if constexpr (std::is_same_v<T, Resistor>) {
                        if (kind != 'R') throw Error(name + ": resistor name must start with R");
                        if (e.ohms <= 0) throw Error(name + ": nonpositive resistance");
                        touches_ground |= (e.n1 == kGroundNode || e.n2 == kGroundNode);
                    } else if constexpr (std::is_same_v<T, Capacitor>) {
                        if (kind != 'C') throw Error(name + ": capacitor name must start with C");
                        if (e.farads <= 0) throw Error(name + ": nonpositive capacitance");
                        touches_ground |= (e.n1 == kGroundNode || e.n2 == kGroundNode);
                    } else if constexpr (std::is_same_v<T, VSource>) {
                        if (kind != 'V') throw Error(name + ": source name must start with V");
                        validate_waveform(name, e.waveform);
                        touches_ground |= (e.npos == kGroundNode || e.nneg == kGroundNode);
                    }
                },
                dev);
        }
        if (!touches_ground) throw Error("netlist has no connection to ground node 0");
        for (const auto& dir : directives) {
            if (const auto* t = std::get_if<Tran>(&dir)) {
                if (t->tstop_s <= 0) throw Error(".tran: tstop must be positive");
                if (t->tstep_max_s <= 0 || t->tstep_max_s >= t->tstop_s)
                    throw Error(".tran: tstep must be positive and below tstop");
            }
        }
    }

private:
    static void validate_waveform(const std::string& name, const Waveform& w) {
        if (const auto* p = std::get_if<Pulse>(&w)) {
            if (p->rise_s <= 0 || p->fall_s <= 0)
                throw Error(name + ": pulse rise/fall must be positive");
            if (p->period_s < p->delay_s + p->rise_s + p->width_s + p->fall_s)
                throw Error(name + ": pulse period shorter than delay+rise+width+fall");
        } else if (const auto* pw = std::get_if<Pwl>(&w)) {
            for (std::size_t i = 1; i < pw->points.size(); ++i)
                if (pw->points[i].first <= pw->points[i - 1].first)
                    throw Error(name + ": PWL times must be strictly increasing");
        }
    }
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace detail {

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::vector<std::string> tokenize(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) { out.push_back(cur); cur.clear(); }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline double parse_value(const std::string& tok, int line) {
    auto v = si::parse(tok);
    if (!v) throw ParseError(line, "malformed value '" + tok + "'");
    return *v;
}

/// Looks like a circuit element line (as opposed to a title line).
inline bool looks_like_element(const std::vector<std::string>& toks) {
    if (toks.size() < 4) return false;
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(toks[0][0])));
    if (c != 'M' && c != 'R' && c != 'C' && c != 'V') return false;
    for (char ch : toks[0])
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') return false;
    return true;
}

struct Parser {
    std::vector<std::string> lines;
    Netlist net;
    std::vector<std::pair<std::string, int>> mosfet_lines;  // model refs to check
    std::vector<std::string> names_seen;
    int last_line = 1;

    explicit Parser(std::string_view text) {
        std::string cur;
        for (char c : text) {
            if (c == '\n') { lines.push_back(cur); cur.clear(); }
            else if (c != '\r') cur.push_back(c);
        }
        lines.push_back(cur);
    }

    Netlist run() {
        std::size_t start = 0;
        if (!lines.empty()) {
            const std::string& first = lines[0];
            auto toks = tokenize(first);
            if (!toks.empty() && toks[0][0] == '*') {
                std::size_t pos = first.find('*');
                std::string t = first.substr(pos + 1);
                while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front())))
                    t.erase(t.begin());
                net.title = t;
                start = 1;
            } else if (toks.empty() || looks_like_element(toks) || toks[0][0] == '.') {
                // No title line; fall through to normal parsing.
            } else {
                net.title = first;
                start = 1;
            }
        }

        for (std::size_t i = start; i < lines.size(); ++i) {
            const int lineno = static_cast<int>(i) + 1;
            last_line = lineno;
            auto toks = tokenize(lines[i]);
            if (toks.empty() || toks[0][0] == '*') continue;
            if (toks[0][0] == '.') {
                if (parse_card(toks, lineno)) break;  // .end
                continue;
            }
            parse_element(toks, lines[i], lineno);
        }
        finish();
        return std::move(net);
    }

    bool parse_card(const std::vector<std::string>& toks, int line) {
        const std::string card = to_lower(toks[0]);
        if (card == ".end") return true;
        if (card == ".op") {
            net.directives.push_back(Op{});
            return false;
        }
        if (card == ".tran") {
            if (toks.size() != 3) throw ParseError(line, ".tran expects <tstep> <tstop>");
            Tran t;
            t.tstep_max_s = parse_value(toks[1], line);
            t.tstop_s = parse_value(toks[2], line);
            net.directives.push_back(t);
            return false;
        }
        if (card == ".model") {
            parse_model(toks, line);
            return false;
        }
        throw ParseError(line, "unknown card '" + toks[0] + "'");
    }

    void parse_model(const std::vector<std::string>& toks, int line) {
        if (toks.size() < 3) throw ParseError(line, ".model expects <name> <nmos|pmos> (params)");
        const std::string name = to_lower(toks[1]);
        const std::string type = to_lower(toks[2]);
        ModelCard card;
        if (type == "nmos") card = ModelCard::nmos_default();
        else if (type == "pmos") card = ModelCard::pmos_default();
        else throw ParseError(line, "model type must be nmos or pmos, got '" + toks[2] + "'");

        // Parameter list; parentheses are optional separators.
        std::string params;
        for (std::size_t i = 3; i < toks.size(); ++i) params += toks[i] + " ";
        for (char& c : params)
            if (c == '(' || c == ')' || c == ',') c = ' ';
        for (const auto& kv : tokenize(params)) {
            auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw ParseError(line, "model parameter '" + kv + "' is not KEY=VALUE");
            const std::string key = to_lower(kv.substr(0, eq));
            const double val = parse_value(kv.substr(eq + 1), line);
            if (key == "vt0") card.vt0 = val;
            else if (key == "kp") card.kp = val;
            else if (key == "lambda") card.lambda = val;
            else if (key == "cgso") card.cgso = val;
            else if (key == "cgdo") card.cgdo = val;
            else if (key == "cox") card.cox = val;
            else throw ParseError(line, "unknown model parameter '" + key + "'");
        }
        if (card.kp <= 0) throw ParseError(line, "model " + name + ": KP must be positive");
        if (card.lambda < 0 || card.vt0 <= 0 || card.cgso < 0 || card.cgdo < 0 || card.cox < 0)
            throw ParseError(line, "model " + name + ": parameter out of range");
        net.models[name] = card;
    }

    void check_name(const std::string& name, int line) {
        if (std::find(names_seen.begin(), names_seen.end(), name) != names_seen.end())
            throw ParseError(line, "duplicate device name '" + name + "'");
        names_seen.push_back(name);
    }

    void parse_element(const std::vector<std::string>& toks, const std::string& raw, int line) {
        const char kind = static_cast<char>(std::toupper(static_cast<unsigned char>(toks[0][0])));
        switch (kind) {
            case 'M': parse_mosfet(toks, line); break;
            case 'R': parse_rc(toks, line, /*is_resistor=*/true); break;
            case 'C': parse_rc(toks, line, /*is_resistor=*/false); break;
            case 'V': parse_vsource(toks, raw, line); break;
            default:
                throw ParseError(line, "unknown element '" + toks[0] + "'");
        }
    }

    void parse_mosfet(const std::vector<std::string>& toks, int line) {
        if (toks.size() != 8)
            throw ParseError(line, "MOSFET expects: Mxxx nd ng ns nb model W=<val> L=<val>");
        Mosfet m;
        m.name = toks[0];
        check_name(m.name, line);
        m.drain = toks[1];
        m.gate = toks[2];
        m.source = toks[3];
        m.bulk = toks[4];
        m.model = to_lower(toks[5]);
        bool have_w = false, have_l = false;
        for (std::size_t i = 6; i < 8; ++i) {
            auto eq = toks[i].find('=');
            if (eq == std::string::npos)
                throw ParseError(line, "expected W=/L= assignment, got '" + toks[i] + "'");
            const std::string key = to_lower(toks[i].substr(0, eq));
            const double val = parse_value(toks[i].substr(eq + 1), line);
            if (key == "w") { m.width_m = val; have_w = true; }
            else if (key == "l") { m.length_m = val; have_l = true; }
            else throw ParseError(line, "unknown MOSFET parameter '" + key + "'");
        }
        if (!have_w || !have_l) throw ParseError(line, "MOSFET requires both W= and L=");
        if (m.width_m <= 0 || m.length_m <= 0)
            throw ParseError(line, m.name + ": W and L must be positive");
        mosfet_lines.emplace_back(m.model, line);
        net.devices.push_back(m);
    }

    void parse_rc(const std::vector<std::string>& toks, int line, bool is_resistor) {
        if (toks.size() != 4)
            throw ParseError(line, std::string(is_resistor ? "resistor" : "capacitor") +
                                       " expects: name n1 n2 <value>");
        const double val = parse_value(toks[3], line);
        if (val <= 0) throw ParseError(line, toks[0] + ": value must be positive");
        check_name(toks[0], line);
        if (is_resistor)
            net.devices.push_back(Resistor{toks[0], toks[1], toks[2], val});
        else
            net.devices.push_back(Capacitor{toks[0], toks[1], toks[2], val});
    }

    void parse_vsource(const std::vector<std::string>& toks, const std::string& raw, int line) {
        if (toks.size() < 4)
            throw ParseError(line, "source expects: Vxxx n+ n- <DC val|PULSE(...)|PWL(...)>");
        VSource v;
        v.name = toks[0];
        check_name(v.name, line);
        v.npos = toks[1];
        v.nneg = toks[2];

        // Everything after the node pair is the waveform spec.
        std::size_t pos = 0;
        for (int skipped = 0; skipped < 3 && pos < raw.size();) {
            while (pos < raw.size() && std::isspace(static_cast<unsigned char>(raw[pos]))) ++pos;
            while (pos < raw.size() && !std::isspace(static_cast<unsigned char>(raw[pos]))) ++pos;
            ++skipped;
        }
        std::string spec = raw.substr(std::min(pos, raw.size()));
        while (!spec.empty() && std::isspace(static_cast<unsigned char>(spec.front())))
            spec.erase(spec.begin());
        v.waveform = parse_waveform(spec, line);
        net.devices.push_back(v);
    }

    Waveform parse_waveform(const std::string& spec, int line) {
        const std::string lower = to_lower(spec);
        if (lower.rfind("pulse", 0) == 0 || lower.rfind("pwl", 0) == 0) {
            auto open = spec.find('(');
            auto close = spec.rfind(')');
            if (open == std::string::npos || close == std::string::npos || close < open)
                throw ParseError(line, "malformed waveform '" + spec + "'");
            auto args = tokenize(spec.substr(open + 1, close - open - 1));
            std::vector<double> vals;
            vals.reserve(args.size());
            for (const auto& a : args) vals.push_back(parse_value(a, line));
            if (lower.rfind("pulse", 0) == 0) {
                if (vals.size() != 7)
                    throw ParseError(line, "PULSE expects (v1 v2 td tr tf pw per)");
                return Pulse{vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6]};
            }
            if (vals.size() < 4 || vals.size() % 2 != 0)
                throw ParseError(line, "PWL expects an even number of (t v) values, at least two pairs");
            Pwl p;
            for (std::size_t i = 0; i < vals.size(); i += 2) {
                if (!p.points.empty() && vals[i] <= p.points.back().first)
                    throw ParseError(line, "PWL times must be strictly increasing");
                p.points.emplace_back(vals[i], vals[i + 1]);
            }
            return p;
        }
        auto toks = tokenize(spec);
        if (toks.size() == 2 && to_lower(toks[0]) == "dc")
            return Dc{parse_value(toks[1], line)};
        if (toks.size() == 1 && to_lower(toks[0]) != "dc")
            return Dc{parse_value(toks[0], line)};
        throw ParseError(line, "malformed source waveform '" + spec + "'");
    }

    void finish() {
        for (const auto& [model, line] : mosfet_lines)
            if (!net.models.count(model))
                throw ParseError(line, "undefined model '" + model + "'");
        if (!net.devices.empty()) {
            bool touches_ground = false;
            for (const auto& dev : net.devices) {
                std::visit(
                    [&](const auto& e) {
                        using T = std::decay_t<decltype(e)>;
                        if constexpr (std::is_same_v<T, Mosfet>) {
                            touches_ground |= e.drain == kGroundNode || e.gate == kGroundNode ||
                                              e.source == kGroundNode || e.bulk == kGroundNode;
                        } else if constexpr (std::is_same_v<T, VSource>) {
                            touches_ground |= e.npos == kGroundNode || e.nneg == kGroundNode;
                        } else {
                            touches_ground |= e.n1 == kGroundNode || e.n2 == kGroundNode;
                        }
                    },
                    dev);
            }
            if (!touches_ground)
                throw ParseError(last_line, "missing ground node: nothing connects to node 0");
        }
        net.validate();
    }
};

}  // namespace detail

/// Parse netlist text. The first line is the title when it starts with '*'
/// or does not look like an element or card line.
inline Netlist parse(std::string_view text) { return detail::Parser(text).run(); }

// ---------------------------------------------------------------------------
// Canonical printer
// ---------------------------------------------------------------------------

namespace detail {

inline std::string waveform_text(const Waveform& w) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Dc>) {
                return "DC " + si::format(v.volts);
            } else if constexpr (std::is_same_v<T, Pulse>) {
                return "PULSE(" + si::format(v.v1) + " " + si::format(v.v2) + " " +
                       si::format(v.delay_s) + " " + si::format(v.rise_s) + " " +
                       si::format(v.fall_s) + " " + si::format(v.width_s) + " " +
                       si::format(v.period_s) + ")";
            } else {
                std::string out = "PWL(";
                bool first = true;
                for (const auto& [t, volts] : v.points) {
                    if (!first) out += " ";
                    out += si::format(t) + " " + si::format(volts);
                    first = false;
                }
                return out + ")";
            }
        },
        w);
}

}  // namespace detail

/// Canonical text form; parse(print(n)) is structurally equal to n.
inline std::string print(const Netlist& net) {
    std::ostringstream out;
    out << "*";
    if (!net.title.empty()) out << " " << net.title;
    out << "\n";
    for (const auto& dev : net.devices) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, Mosfet>) {
                    out << e.name << " " << e.drain << " " << e.gate << " " << e.source << " "
                        << e.bulk << " " << e.model << " W=" << si::format(e.width_m)
                        << " L=" << si::format(e.length_m) << "\n";
                } else if constexpr (std::is_same_v<T, Resistor>) {
                    out << e.name << " " << e.n1 << " " << e.n2 << " " << si::format(e.ohms)
                        << "\n";
                } else if constexpr (std::is_same_v<T, Capacitor>) {
                    out << e.name << " " << e.n1 << " " << e.n2 << " " << si::format(e.farads)
                        << "\n";
                } else {
                    out << e.name << " " << e.npos << " " << e.nneg << " "
                        << detail::waveform_text(e.waveform) << "\n";
                }
            },
            dev);
    }
    for (const auto& [name, card] : net.models) {
        out << ".model " << name << " " << (card.polarity == Polarity::Nmos ? "nmos" : "pmos")
            << " (VT0=" << si::format(card.vt0) << " KP=" << si::format(card.kp)
            << " LAMBDA=" << si::format(card.lambda) << " CGSO=" << si::format(card.cgso)
            << " CGDO=" << si::format(card.cgdo) << " COX=" << si::format(card.cox) << ")\n";
    }
    for (const auto& dir : net.directives) {
        if (const auto* t = std::get_if<Tran>(&dir))
            out << ".tran " << si::format(t->tstep_max_s) << " " << si::format(t->tstop_s) << "\n";
        else
            out << ".op\n";
    }
    out << ".end\n";
    return out.str();
}

}  // namespace dlcsim
