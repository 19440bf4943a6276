#include <wsp/instance_io.hh>

#include <cctype>
#include <sstream>
#include <vector>

namespace wsp
{
    namespace
    {
        struct LineReader
        {
            std::istringstream in;
            int lineno = 0;

            explicit LineReader(const std::string & text) : in(text) { }

            auto next(std::vector<std::string> & tokens) -> bool
            {
                std::string raw;
                while (std::getline(in, raw)) {
                    ++lineno;
                    if (! raw.empty() && raw.back() == '\r')
                        raw.pop_back();
                    auto first = raw.find_first_not_of(" \t");
                    if (first == std::string::npos || raw[first] == '#')
                        continue;
                    tokens.clear();
                    std::istringstream split{raw};
                    std::string tok;
                    while (split >> tok)
                        tokens.push_back(tok);
                    return true;
                }
                return false;
            }

            [[noreturn]] auto fail(const std::string & message) const -> void
            {
                throw ParseError{"line " + std::to_string(lineno) + ": " + message};
            }
        };

        auto parse_number(const std::string & tok, const LineReader & reader) -> int
        {
            if (tok.empty())
                reader.fail("expected a number");
            for (auto ch : tok)
                if (! std::isdigit(static_cast<unsigned char>(ch)))
                    reader.fail("expected a number, got '" + tok + "'");
            try {
                return std::stoi(tok);
            }
            catch (const std::exception &) {
                reader.fail("number out of range: '" + tok + "'");
            }
        }

        auto parse_prefixed(const std::string & tok, char prefix, const LineReader & reader) -> int
        {
            if (tok.size() < 2 || tok[0] != prefix)
                reader.fail(std::string{"expected '"} + prefix + "<id>', got '" + tok + "'");
            return parse_number(tok.substr(1), reader);
        }

        auto parse_scope(const std::vector<std::string> & tokens, std::size_t from,
                const LineReader & reader) -> std::vector<int>
        {
            std::vector<int> scope;
            for (auto i = from; i < tokens.size(); ++i)
                scope.push_back(parse_prefixed(tokens[i], 's', reader));
            if (scope.empty())
                reader.fail("constraint scope is empty");
            return scope;
        }
    }

    auto write_instance(const Instance & inst) -> std::string
    {
        std::string out;
        out += "wsp 1\n";
        out += "k " + std::to_string(inst.step_count) + "\n";
        out += "n " + std::to_string(inst.user_count) + "\n";
        out += "auth:\n";
        for (int u = 0; u < inst.user_count; ++u) {
            out += "u" + std::to_string(u) + ":";
            for (int s = 0; s < inst.step_count; ++s)
                if (inst.auth[static_cast<std::size_t>(u)] & step_bit(s))
                    out += " s" + std::to_string(s);
            out += "\n";
        }
        out += "constraints:\n";
        for (const auto & c : inst.constraints) {
            switch (c.kind) {
                case ConstraintKind::NotEquals: out += "sod"; break;
                case ConstraintKind::Equals: out += "bod"; break;
                case ConstraintKind::AtMost: out += "atmost " + std::to_string(c.r); break;
                case ConstraintKind::AtLeast: out += "atleast " + std::to_string(c.r); break;
                case ConstraintKind::Threshold:
                    out += "threshold " + std::to_string(c.t_lo) + " " + std::to_string(c.t_hi);
                    break;
            }
            for (auto s : c.scope)
                out += " s" + std::to_string(s);
            out += "\n";
        }
        return out;
    }

    auto parse_instance(const std::string & text) -> Instance
    {
        LineReader reader{text};
        std::vector<std::string> tokens;

        if (! reader.next(tokens) || tokens.size() != 2 || tokens[0] != "wsp" || tokens[1] != "1")
            reader.fail("expected header 'wsp 1'");
        if (! reader.next(tokens) || tokens.size() != 2 || tokens[0] != "k")
            reader.fail("expected 'k <count>'");
        auto k = parse_number(tokens[1], reader);
        if (! reader.next(tokens) || tokens.size() != 2 || tokens[0] != "n")
            reader.fail("expected 'n <count>'");
        auto n = parse_number(tokens[1], reader);
        if (! reader.next(tokens) || tokens.size() != 1 || tokens[0] != "auth:")
            reader.fail("expected 'auth:'");
        if (k < 1 || k > max_steps)
            reader.fail("step count out of range");
        if (n < 0)
            reader.fail("negative user count");

        Instance inst;
        inst.step_count = k;
        inst.user_count = n;
        inst.auth.assign(static_cast<std::size_t>(n), 0);

        for (int u = 0; u < n; ++u) {
            if (! reader.next(tokens))
                reader.fail("expected authorisation line for u" + std::to_string(u));
            if (tokens[0] != "u" + std::to_string(u) + ":")
                reader.fail("expected 'u" + std::to_string(u) + ":', got '" + tokens[0] + "'");
            for (std::size_t i = 1; i < tokens.size(); ++i) {
                auto s = parse_prefixed(tokens[i], 's', reader);
                if (s < 0 || s >= k)
                    reader.fail("step id out of range: s" + std::to_string(s));
                inst.auth[static_cast<std::size_t>(u)] |= step_bit(s);
            }
        }

        if (! reader.next(tokens) || tokens.size() != 1 || tokens[0] != "constraints:")
            reader.fail("expected 'constraints:'");

        while (reader.next(tokens)) {
            const auto & head = tokens[0];
            if (head == "sod" || head == "bod") {
                if (tokens.size() != 3)
                    reader.fail(head + " takes exactly two steps");
                auto a = parse_prefixed(tokens[1], 's', reader);
                auto b = parse_prefixed(tokens[2], 's', reader);
                inst.constraints.push_back(head == "sod"
                        ? Constraint::not_equals(a, b)
                        : Constraint::equals(a, b));
            }
            else if (head == "atmost" || head == "atleast") {
                if (tokens.size() < 3)
                    reader.fail(head + " takes a bound and a scope");
                auto r = parse_number(tokens[1], reader);
                auto scope = parse_scope(tokens, 2, reader);
                inst.constraints.push_back(head == "atmost"
                        ? Constraint::at_most(r, scope)
                        : Constraint::at_least(r, scope));
            }
            else if (head == "threshold") {
                if (tokens.size() < 4)
                    reader.fail("threshold takes two bounds and a scope");
                auto t_lo = parse_number(tokens[1], reader);
                auto t_hi = parse_number(tokens[2], reader);
                inst.constraints.push_back(Constraint::threshold(t_lo, t_hi, parse_scope(tokens, 3, reader)));
            }
            else
                reader.fail("unknown constraint kind '" + head + "'");
        }

        inst.validate();
        return inst;
    }

    auto write_solution(const Plan & plan) -> std::string
    {
        if (! plan.complete())
            throw StructuralError{"cannot write an incomplete plan as a solution"};
        std::string out = "SAT\n";
        for (std::size_t s = 0; s < plan.user_of_step.size(); ++s)
            out += "s" + std::to_string(s) + " -> u" + std::to_string(plan.user_of_step[s]) + "\n";
        return out;
    }

    auto write_solution_unsat() -> std::string
    {
        return "UNSAT\n";
    }

    auto parse_solution(const std::string & text, int step_count) -> SolutionText
    {
        LineReader reader{text};
        std::vector<std::string> tokens;

        if (! reader.next(tokens) || tokens.size() != 1)
            reader.fail("expected 'SAT' or 'UNSAT'");
        if (tokens[0] == "UNSAT")
            return SolutionText{false, Plan::empty(step_count)};
        if (tokens[0] != "SAT")
            reader.fail("expected 'SAT' or 'UNSAT', got '" + tokens[0] + "'");

        SolutionText result{true, Plan::empty(step_count)};
        for (int i = 0; i < step_count; ++i) {
            if (! reader.next(tokens))
                reader.fail("expected " + std::to_string(step_count) + " assignment lines");
            if (tokens.size() != 3 || tokens[1] != "->")
                reader.fail("expected 's<i> -> u<j>'");
            auto s = parse_prefixed(tokens[0], 's', reader);
            auto u = parse_prefixed(tokens[2], 'u', reader);
            if (s < 0 || s >= step_count)
                reader.fail("step id out of range: s" + std::to_string(s));
            if (result.plan.user_of_step[static_cast<std::size_t>(s)] != -1)
                reader.fail("step s" + std::to_string(s) + " assigned twice");
            result.plan.user_of_step[static_cast<std::size_t>(s)] = u;
        }
        if (reader.next(tokens))
            reader.fail("unexpected content after the assignment lines");
        return result;
    }
}
