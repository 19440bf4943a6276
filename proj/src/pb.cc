#include <wsp/pb.hh>
#include <wsp/instance_io.hh>

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace wsp
{
    auto PBVar::tag() const -> std::string
    {
        switch (kind) {
            case VarKind::X: return "x_s" + std::to_string(a) + "_u" + std::to_string(b);
            case VarKind::M: return "m_s" + std::to_string(a) + "_s" + std::to_string(b);
            case VarKind::Y: return "y_g" + std::to_string(a) + "_u" + std::to_string(b);
            case VarKind::Z: return "z_g" + std::to_string(a) + "_u" + std::to_string(b);
            case VarKind::T: return "t_g" + std::to_string(a) + "_p" + std::to_string(b);
        }
        throw StructuralError{"unknown variable kind"};
    }

    namespace
    {
        auto var_key(const PBVar & v) -> std::tuple<int, int, int>
        {
            return {static_cast<int>(v.kind), v.a, v.b};
        }
    }

    auto PBModel::add_var(PBVar v) -> int
    {
        if (v.kind == VarKind::Y || v.kind == VarKind::Z || v.kind == VarKind::T)
            group_counter_ = std::max(group_counter_, v.a + 1);
        vars.push_back(v);
        return static_cast<int>(vars.size()) - 1;
    }

    auto PBModel::add_constraint(std::vector<PBTerm> terms, PBRelation rel, long long rhs,
            std::string note) -> void
    {
        std::sort(terms.begin(), terms.end(),
                [] (const PBTerm & x, const PBTerm & y) { return x.var < y.var; });
        std::vector<PBTerm> merged;
        for (const auto & t : terms) {
            if (t.var < 0 || t.var >= static_cast<int>(vars.size()))
                throw StructuralError{"constraint references a variable outside the catalogue"};
            if (! merged.empty() && merged.back().var == t.var)
                merged.back().coef += t.coef;
            else
                merged.push_back(t);
        }
        std::erase_if(merged, [] (const PBTerm & t) { return t.coef == 0; });
        constraints.push_back(PBConstraint{std::move(merged), rel, rhs});
        notes.push_back(std::move(note));
    }

    auto PBModel::find_var(const PBVar & v) const -> int
    {
        if (indexed_count_ != vars.size()) {
            index_.clear();
            for (std::size_t i = 0; i < vars.size(); ++i)
                index_.emplace(var_key(vars[i]), static_cast<int>(i));
            indexed_count_ = vars.size();
        }
        auto it = index_.find(var_key(v));
        return it == index_.end() ? -1 : it->second;
    }

    auto PBModel::x_var(int step, int user) const -> int
    {
        return find_var(PBVar{VarKind::X, step, user});
    }

    auto PBModel::m_var(int step_i, int step_j) const -> int
    {
        if (step_i == step_j)
            throw StructuralError{"no m variable for a step with itself"};
        return find_var(PBVar{VarKind::M, std::min(step_i, step_j), std::max(step_i, step_j)});
    }

    auto PBModel::next_group() -> int
    {
        return group_counter_++;
    }

    namespace
    {
        auto require_m(const PBModel & model, int i, int j) -> int
        {
            auto v = model.m_var(i, j);
            if (v < 0)
                throw ConfigError{"the model has no m variable for this step pair; "
                                  "use the pattern-based formulation"};
            return v;
        }

        auto scope_label(const std::vector<int> & scope) -> std::string
        {
            std::string out;
            for (auto s : scope)
                out += " s" + std::to_string(s);
            return out;
        }

        auto reject_equals(const Instance & inst) -> void
        {
            for (const auto & c : inst.constraints)
                if (c.kind == ConstraintKind::Equals)
                    throw ConfigError{"equals constraints must be merged away before encoding"};
        }

        auto add_x_vars_and_one_hot(PBModel & model, const Instance & inst) -> void
        {
            for (int s = 0; s < inst.step_count; ++s)
                for (int u = 0; u < inst.user_count; ++u)
                    if (inst.auth[static_cast<std::size_t>(u)] & step_bit(s))
                        model.add_var(PBVar{VarKind::X, s, u});
            for (int s = 0; s < inst.step_count; ++s) {
                std::vector<PBTerm> terms;
                for (int u = 0; u < inst.user_count; ++u) {
                    auto x = model.x_var(s, u);
                    if (x >= 0)
                        terms.push_back(PBTerm{1, x});
                }
                model.add_constraint(std::move(terms), PBRelation::Eq, 1,
                        "one-hot s" + std::to_string(s));
            }
        }
    }

    auto encode_udpb(const Instance & inst) -> PBModel
    {
        inst.validate();
        reject_equals(inst);
        for (const auto & c : inst.constraints)
            if (c.kind == ConstraintKind::Threshold)
                throw ConfigError{"threshold constraints are not supported by the user-driven encoding"};

        PBModel model;
        model.step_count = inst.step_count;
        model.user_count = inst.user_count;
        model.instance_text = write_instance(inst);

        add_x_vars_and_one_hot(model, inst);

        for (const auto & c : inst.constraints) {
            if (c.kind == ConstraintKind::NotEquals) {
                auto s1 = c.scope[0], s2 = c.scope[1];
                for (int u = 0; u < inst.user_count; ++u) {
                    auto x1 = model.x_var(s1, u), x2 = model.x_var(s2, u);
                    if (x1 >= 0 && x2 >= 0)
                        model.add_constraint({{-1, x1}, {-1, x2}}, PBRelation::Ge, -1,
                                "sod s" + std::to_string(s1) + " s" + std::to_string(s2)
                                        + " u" + std::to_string(u));
                }
            }
            else if (c.kind == ConstraintKind::AtMost) {
                auto g = model.next_group();
                std::vector<PBTerm> sum;
                for (int u = 0; u < inst.user_count; ++u) {
                    auto mask = inst.auth[static_cast<std::size_t>(u)] & c.scope_mask;
                    if (! mask)
                        continue;
                    auto y = model.add_var(PBVar{VarKind::Y, g, u});
                    for (auto m = mask; m; m &= m - 1) {
                        auto s = std::countr_zero(m);
                        model.add_constraint({{1, y}, {-1, model.x_var(s, u)}}, PBRelation::Ge, 0,
                                "atmost g" + std::to_string(g) + " covers u" + std::to_string(u)
                                        + " s" + std::to_string(s));
                    }
                    sum.push_back(PBTerm{-1, y});
                }
                model.add_constraint(std::move(sum), PBRelation::Ge, -c.r,
                        "atmost g" + std::to_string(g) + " cap" + scope_label(c.scope));
            }
            else if (c.kind == ConstraintKind::AtLeast) {
                auto g = model.next_group();
                std::vector<PBTerm> sum;
                for (int u = 0; u < inst.user_count; ++u) {
                    auto mask = inst.auth[static_cast<std::size_t>(u)] & c.scope_mask;
                    if (! mask)
                        continue;
                    auto z = model.add_var(PBVar{VarKind::Z, g, u});
                    std::vector<PBTerm> link{{-1, z}};
                    for (auto m = mask; m; m &= m - 1)
                        link.push_back(PBTerm{1, model.x_var(std::countr_zero(m), u)});
                    model.add_constraint(std::move(link), PBRelation::Ge, 0,
                            "atleast g" + std::to_string(g) + " use u" + std::to_string(u));
                    sum.push_back(PBTerm{1, z});
                }
                model.add_constraint(std::move(sum), PBRelation::Ge, c.r,
                        "atleast g" + std::to_string(g) + " floor" + scope_label(c.scope));
            }
        }
        return model;
    }

    auto encode_pbpb(const Instance & inst, const EncodeOptions & opts) -> PBModel
    {
        inst.validate();
        reject_equals(inst);

        PBModel model;
        model.step_count = inst.step_count;
        model.user_count = inst.user_count;
        model.instance_text = write_instance(inst);

        auto k = inst.step_count;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
                model.add_var(PBVar{VarKind::M, i, j});

        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
                for (int l = j + 1; l < k; ++l) {
                    auto m_ij = model.m_var(i, j), m_jl = model.m_var(j, l), m_il = model.m_var(i, l);
                    auto label = " s" + std::to_string(i) + " s" + std::to_string(j)
                            + " s" + std::to_string(l);
                    model.add_constraint({{-1, m_ij}, {-1, m_jl}, {1, m_il}}, PBRelation::Ge, -1,
                            "transitivity" + label);
                    model.add_constraint({{-1, m_ij}, {1, m_jl}, {-1, m_il}}, PBRelation::Ge, -1,
                            "transitivity" + label);
                    model.add_constraint({{1, m_ij}, {-1, m_jl}, {-1, m_il}}, PBRelation::Ge, -1,
                            "transitivity" + label);
                }

        add_x_vars_and_one_hot(model, inst);

        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                auto m = model.m_var(i, j);
                auto label = "link s" + std::to_string(i) + " s" + std::to_string(j);
                for (int u = 0; u < inst.user_count; ++u) {
                    auto xi = model.x_var(i, u), xj = model.x_var(j, u);
                    auto ulabel = label + " u" + std::to_string(u);
                    if (xi >= 0 && xj >= 0) {
                        model.add_constraint({{-1, xi}, {1, xj}, {-1, m}}, PBRelation::Ge, -1, ulabel);
                        model.add_constraint({{1, xi}, {-1, xj}, {-1, m}}, PBRelation::Ge, -1, ulabel);
                        model.add_constraint({{-1, xi}, {-1, xj}, {1, m}}, PBRelation::Ge, -1, ulabel);
                    }
                    else if (xi >= 0)
                        model.add_constraint({{-1, xi}, {-1, m}}, PBRelation::Ge, -1, ulabel);
                    else if (xj >= 0)
                        model.add_constraint({{-1, xj}, {-1, m}}, PBRelation::Ge, -1, ulabel);
                }
            }

        for (const auto & c : inst.constraints) {
            auto q = static_cast<int>(c.scope.size());
            switch (c.kind) {
                case ConstraintKind::NotEquals:
                    model.add_constraint({{1, model.m_var(c.scope[0], c.scope[1])}}, PBRelation::Eq, 0,
                            "sod s" + std::to_string(c.scope[0]) + " s" + std::to_string(c.scope[1]));
                    break;

                case ConstraintKind::Equals:
                    break;   // rejected above

                case ConstraintKind::AtMost:
                    if (opts.counting == CountingMode::TVars)
                        encode_counting_tvars(model, ConstraintKind::AtMost, c.r, c.scope);
                    else if (q == 5 && c.r == 3) {
                        std::vector<PBTerm> terms;
                        for (int a = 0; a < q; ++a)
                            for (int b = a + 1; b < q; ++b)
                                terms.push_back(PBTerm{1, model.m_var(c.scope[a], c.scope[b])});
                        model.add_constraint(std::move(terms), PBRelation::Ge, edge_bounds(5, 3).lo,
                                "atmost-3 edge sum" + scope_label(c.scope));
                    }
                    else
                        encode_atmost_general(model, c.r, c.scope);
                    break;

                case ConstraintKind::AtLeast:
                    if (opts.counting == CountingMode::TVars)
                        encode_counting_tvars(model, ConstraintKind::AtLeast, c.r, c.scope);
                    else if (q == 5 && c.r == 3) {
                        std::vector<PBTerm> terms;
                        for (int a = 0; a < q; ++a)
                            for (int b = a + 1; b < q; ++b)
                                terms.push_back(PBTerm{-1, model.m_var(c.scope[a], c.scope[b])});
                        model.add_constraint(std::move(terms), PBRelation::Ge, -edge_bounds(5, 3).hi,
                                "atleast-3 edge sum" + scope_label(c.scope));
                    }
                    else if (q <= 8)
                        encode_atleast_general_perm(model, c.r, c.scope);
                    else
                        encode_counting_tvars(model, ConstraintKind::AtLeast, c.r, c.scope);
                    break;

                case ConstraintKind::Threshold:
                    encode_threshold(model, c.t_lo, c.t_hi, c.scope);
                    break;
            }
        }
        return model;
    }

    auto exclude_pattern(PBModel & model, const Pattern & pat) -> void
    {
        auto covered = pat.covered();
        std::vector<int> steps;
        for (int s = 0; s < max_steps; ++s)
            if (covered & step_bit(s))
                steps.push_back(s);

        std::vector<PBTerm> terms;
        long long within = 0;
        for (std::size_t a = 0; a < steps.size(); ++a)
            for (std::size_t b = a + 1; b < steps.size(); ++b) {
                auto m = require_m(model, steps[a], steps[b]);
                bool same = false;
                for (const auto & block : pat.blocks)
                    if ((block & step_bit(steps[a])) && (block & step_bit(steps[b]))) {
                        same = true;
                        break;
                    }
                if (same) {
                    terms.push_back(PBTerm{-1, m});
                    ++within;
                }
                else
                    terms.push_back(PBTerm{1, m});
            }
        model.add_constraint(std::move(terms), PBRelation::Ge, 1 - within, "exclude pattern");
    }

    auto edge_bounds(int q, int r) -> EdgeBounds
    {
        if (q < 1 || q > 6)
            throw ConfigError{"edge bounds are tabulated for scope sizes 1 to 6"};
        if (r < 1 || r > q)
            throw ConfigError{"edge bounds need 1 <= r <= scope size"};

        auto choose2 = [] (long long m) { return m * (m - 1) / 2; };
        auto lo_of = [&] (int rr) {
            auto base = q / rr, extra = q % rr;
            return extra * choose2(base + 1) + (rr - extra) * choose2(base);
        };
        auto hi_of = [&] (int rr) { return choose2(q - rr + 1); };

        bool overlap = false;
        for (int rr = 1; rr < q; ++rr)
            if (hi_of(rr + 1) >= lo_of(rr))
                overlap = true;

        return EdgeBounds{lo_of(r), hi_of(r), overlap};
    }

    auto encode_atmost_general(PBModel & model, int r, const std::vector<int> & scope) -> void
    {
        auto q = static_cast<int>(scope.size());
        if (r >= q)
            return;   // any assignment uses at most q users

        // every (r+1)-subset must contain a same-block pair
        auto t = r + 1;
        std::vector<int> idx(static_cast<std::size_t>(t));
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            std::vector<PBTerm> terms;
            for (int a = 0; a < t; ++a)
                for (int b = a + 1; b < t; ++b)
                    terms.push_back(PBTerm{1, require_m(model,
                            scope[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])],
                            scope[static_cast<std::size_t>(idx[static_cast<std::size_t>(b)])])});
            model.add_constraint(std::move(terms), PBRelation::Ge, 1,
                    "atmost-" + std::to_string(r) + " subset" + scope_label(scope));

            int i = t - 1;
            while (i >= 0 && idx[static_cast<std::size_t>(i)] == q - t + i)
                --i;
            if (i < 0)
                break;
            ++idx[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < t; ++j)
                idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
        }
    }

    auto encode_atleast_general_perm(PBModel & model, int r, const std::vector<int> & scope) -> void
    {
        auto q = static_cast<int>(scope.size());
        if (r <= 1)
            return;   // a non-empty scope always uses at least one user
        if (r > q)
            throw ConfigError{"at-least bound exceeds the scope size"};
        if (q > 8)
            throw ConfigError{"the permutation encoding is limited to scopes of at most 8 steps"};

        std::vector<int> rest(scope.begin() + 1, scope.end());
        do {
            if (q >= 3 && rest.front() > rest.back())
                continue;   // each cycle once, not once per direction

            std::vector<PBTerm> terms;
            auto prev = scope[0];
            for (auto s : rest) {
                terms.push_back(PBTerm{-1, require_m(model, prev, s)});
                prev = s;
            }
            terms.push_back(PBTerm{-1, require_m(model, prev, scope[0])});
            model.add_constraint(std::move(terms), PBRelation::Ge, static_cast<long long>(r) - q,
                    "atleast-" + std::to_string(r) + " cycle" + scope_label(scope));
        } while (std::next_permutation(rest.begin(), rest.end()));
    }

    auto encode_counting_tvars(PBModel & model, ConstraintKind kind, int r,
            const std::vector<int> & scope) -> void
    {
        if (kind != ConstraintKind::AtMost && kind != ConstraintKind::AtLeast)
            throw ConfigError{"t-variable encoding applies to counting constraints only"};

        auto q = static_cast<int>(scope.size());
        auto g = model.next_group();
        auto glabel = "g" + std::to_string(g);

        std::vector<int> tv;
        for (int i = 0; i < q; ++i)
            tv.push_back(model.add_var(PBVar{VarKind::T, g, i}));

        model.add_constraint({{1, tv[0]}}, PBRelation::Eq, 1, "tvars " + glabel + " first");

        std::vector<PBTerm> sum;
        for (auto t : tv)
            sum.push_back(PBTerm{kind == ConstraintKind::AtLeast ? 1 : -1, t});

        if (kind == ConstraintKind::AtLeast) {
            for (int i = 1; i < q; ++i)
                for (int j = 0; j < i; ++j)
                    model.add_constraint({{-1, tv[static_cast<std::size_t>(i)]},
                            {-1, require_m(model, scope[static_cast<std::size_t>(j)],
                                    scope[static_cast<std::size_t>(i)])}},
                            PBRelation::Ge, -1, "tvars " + glabel + " fresh");
            model.add_constraint(std::move(sum), PBRelation::Ge, r, "tvars " + glabel + " floor");
        }
        else {
            for (int i = 1; i < q; ++i) {
                std::vector<PBTerm> row{{1, tv[static_cast<std::size_t>(i)]}};
                for (int j = 0; j < i; ++j)
                    row.push_back(PBTerm{1, require_m(model, scope[static_cast<std::size_t>(j)],
                            scope[static_cast<std::size_t>(i)])});
                model.add_constraint(std::move(row), PBRelation::Ge, 1, "tvars " + glabel + " cover");
            }
            model.add_constraint(std::move(sum), PBRelation::Ge, -r, "tvars " + glabel + " cap");
        }
    }

    auto encode_threshold(PBModel & model, int t_lo, int t_hi, const std::vector<int> & scope) -> void
    {
        auto q = static_cast<int>(scope.size());
        if (t_lo < 1 || t_lo > t_hi || t_hi > q)
            throw ConfigError{"threshold bounds need 1 <= lo <= hi <= scope size"};

        for (auto s : scope) {
            std::vector<PBTerm> up, down;
            for (auto other : scope) {
                if (other == s)
                    continue;
                auto m = require_m(model, s, other);
                up.push_back(PBTerm{1, m});
                down.push_back(PBTerm{-1, m});
            }
            auto label = " s" + std::to_string(s) + scope_label(scope);
            // the step itself contributes 1 to its block size
            model.add_constraint(std::move(up), PBRelation::Ge, t_lo - 1, "threshold floor" + label);
            model.add_constraint(std::move(down), PBRelation::Ge, -(t_hi - 1), "threshold cap" + label);
        }
    }

    auto emit_opb(const PBModel & model) -> std::string
    {
        std::string out = "* #variable= " + std::to_string(model.vars.size())
                + " #constraint= " + std::to_string(model.constraints.size()) + "\n";
        for (std::size_t i = 0; i < model.vars.size(); ++i)
            out += "* map " + std::to_string(i + 1) + " " + model.vars[i].tag() + "\n";

        if (! model.instance_text.empty()) {
            std::istringstream lines{model.instance_text};
            std::string line;
            while (std::getline(lines, line))
                out += "* inst " + line + "\n";
        }

        for (const auto & c : model.constraints) {
            std::string row;
            for (const auto & t : c.terms) {
                row += (t.coef >= 0 ? "+" : "") + std::to_string(t.coef);
                row += " x" + std::to_string(t.var + 1) + " ";
            }
            row += c.rel == PBRelation::Ge ? ">=" : "=";
            row += " " + std::to_string(c.rhs) + " ;";
            out += row + "\n";
        }
        return out;
    }

    namespace
    {
        [[noreturn]] auto bad_tag(const std::string & tag) -> void
        {
            throw ParseError{"malformed variable tag '" + tag + "'"};
        }

        auto parse_tag(const std::string & tag) -> PBVar
        {
            std::vector<std::string> parts;
            std::size_t pos = 0;
            while (pos <= tag.size()) {
                auto next = tag.find('_', pos);
                if (next == std::string::npos)
                    next = tag.size();
                parts.push_back(tag.substr(pos, next - pos));
                pos = next + 1;
            }
            if (parts.size() != 3 || parts[0].size() != 1)
                bad_tag(tag);

            auto number = [&] (const std::string & part, char pre) {
                if (part.size() < 2 || part[0] != pre)
                    bad_tag(tag);
                for (std::size_t i = 1; i < part.size(); ++i)
                    if (! std::isdigit(static_cast<unsigned char>(part[i])))
                        bad_tag(tag);
                return std::stoi(part.substr(1));
            };

            switch (parts[0][0]) {
                case 'x': return {VarKind::X, number(parts[1], 's'), number(parts[2], 'u')};
                case 'm': return {VarKind::M, number(parts[1], 's'), number(parts[2], 's')};
                case 'y': return {VarKind::Y, number(parts[1], 'g'), number(parts[2], 'u')};
                case 'z': return {VarKind::Z, number(parts[1], 'g'), number(parts[2], 'u')};
                case 't': return {VarKind::T, number(parts[1], 'g'), number(parts[2], 'p')};
                default: bad_tag(tag);
            }
        }
    }

    auto parse_opb(const std::string & text) -> PBModel
    {
        PBModel model;
        long long declared_vars = -1, declared_constraints = -1;

        std::istringstream lines{text};
        std::string line;
        int lineno = 0;
        while (std::getline(lines, line)) {
            ++lineno;
            if (! line.empty() && line.back() == '\r')
                line.pop_back();
            auto fail = [&] (const std::string & message) {
                throw ParseError{"line " + std::to_string(lineno) + ": " + message};
            };

            std::istringstream split{line};
            std::vector<std::string> tokens;
            std::string tok;
            while (split >> tok)
                tokens.push_back(tok);
            if (tokens.empty())
                continue;

            if (tokens[0] == "*") {
                if (tokens.size() >= 5 && tokens[1] == "#variable=") {
                    declared_vars = std::stoll(tokens[2]);
                    if (tokens[3] != "#constraint=")
                        fail("malformed header");
                    declared_constraints = std::stoll(tokens[4]);
                }
                else if (tokens.size() == 4 && tokens[1] == "map") {
                    if (std::stoll(tokens[2]) != static_cast<long long>(model.vars.size()) + 1)
                        fail("variable map ids must be dense and ascending");
                    model.add_var(parse_tag(tokens[3]));
                }
                else if (tokens.size() >= 2 && tokens[1] == "inst") {
                    auto at = line.find("inst");
                    auto rest = at + 5 <= line.size() ? line.substr(at + 5) : std::string{};
                    model.instance_text += rest + "\n";
                }
                continue;
            }

            std::vector<PBTerm> terms;
            std::size_t i = 0;
            while (i < tokens.size() && tokens[i] != ">=" && tokens[i] != "=") {
                if (i + 1 >= tokens.size())
                    fail("truncated constraint");
                long long coef;
                try {
                    coef = std::stoll(tokens[i]);
                }
                catch (const std::exception &) {
                    fail("bad coefficient '" + tokens[i] + "'");
                }
                const auto & vt = tokens[i + 1];
                if (vt.size() < 2 || vt[0] != 'x')
                    fail("bad variable token '" + vt + "'");
                auto id = std::stoll(vt.substr(1));
                if (id < 1 || id > static_cast<long long>(model.vars.size()))
                    fail("variable id out of range");
                terms.push_back(PBTerm{coef, static_cast<int>(id - 1)});
                i += 2;
            }
            if (i >= tokens.size())
                fail("missing relation");
            auto rel = tokens[i] == ">=" ? PBRelation::Ge : PBRelation::Eq;
            if (i + 1 >= tokens.size())
                fail("missing right-hand side");
            auto rhs_tok = tokens[i + 1];
            if (rhs_tok.size() > 1 && rhs_tok.back() == ';') {
                rhs_tok.pop_back();
                tokens.insert(tokens.begin() + static_cast<long>(i) + 2, ";");
            }
            if (i + 3 != tokens.size() || tokens[i + 2] != ";")
                fail("expected '<rhs> ;'");
            long long rhs = 0;
            try {
                rhs = std::stoll(rhs_tok);
            }
            catch (const std::exception &) {
                fail("bad right-hand side");
            }
            model.add_constraint(std::move(terms), rel, rhs, "");
        }

        if (declared_vars >= 0 && declared_vars != static_cast<long long>(model.vars.size()))
            throw ParseError{"header variable count does not match the catalogue"};
        if (declared_constraints >= 0
                && declared_constraints != static_cast<long long>(model.constraints.size()))
            throw ParseError{"header constraint count does not match"};

        if (! model.instance_text.empty()) {
            auto inst = parse_instance(model.instance_text);
            model.step_count = inst.step_count;
            model.user_count = inst.user_count;
        }
        else
            for (const auto & v : model.vars) {
                if (v.kind == VarKind::X) {
                    model.step_count = std::max(model.step_count, v.a + 1);
                    model.user_count = std::max(model.user_count, v.b + 1);
                }
                else if (v.kind == VarKind::M)
                    model.step_count = std::max(model.step_count, v.b + 1);
            }
        return model;
    }

    auto decode_solution(const PBModel & model, const std::vector<char> & values) -> DecodedSolution
    {
        if (values.size() != model.vars.size())
            throw DecodeError{"assignment does not cover the variable catalogue"};

        DecodedSolution out;
        out.plan = Plan::empty(model.step_count);
        std::vector<int> hits(static_cast<std::size_t>(model.step_count), 0);
        bool any_m = false;

        for (std::size_t i = 0; i < model.vars.size(); ++i) {
            const auto & v = model.vars[i];
            if (v.kind == VarKind::X && values[i]) {
                ++hits[static_cast<std::size_t>(v.a)];
                out.plan.user_of_step[static_cast<std::size_t>(v.a)] = v.b;
            }
            else if (v.kind == VarKind::M)
                any_m = true;
        }
        for (int s = 0; s < model.step_count; ++s)
            if (hits[static_cast<std::size_t>(s)] != 1)
                throw DecodeError{"step s" + std::to_string(s) + " does not have exactly one user"};

        if (any_m) {
            std::vector<int> parent(static_cast<std::size_t>(model.step_count));
            std::iota(parent.begin(), parent.end(), 0);
            auto find = [&] (int x) {
                while (parent[static_cast<std::size_t>(x)] != x) {
                    parent[static_cast<std::size_t>(x)] =
                            parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
                    x = parent[static_cast<std::size_t>(x)];
                }
                return x;
            };
            for (std::size_t i = 0; i < model.vars.size(); ++i)
                if (model.vars[i].kind == VarKind::M && values[i]) {
                    auto ra = find(model.vars[i].a), rb = find(model.vars[i].b);
                    if (ra != rb)
                        parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
                }
            for (std::size_t i = 0; i < model.vars.size(); ++i)
                if (model.vars[i].kind == VarKind::M && ! values[i]
                        && find(model.vars[i].a) == find(model.vars[i].b))
                    throw DecodeError{"m variables do not form disjoint cliques"};

            std::vector<StepSet> blocks(static_cast<std::size_t>(model.step_count), 0);
            for (int s = 0; s < model.step_count; ++s)
                blocks[static_cast<std::size_t>(find(s))] |= step_bit(s);
            Pattern pat;
            for (auto b : blocks)
                if (b)
                    pat.blocks.push_back(b);
            pat.canonicalize();
            out.pattern = pat;
        }
        return out;
    }

    auto parse_pb_solution(const std::string & text) -> PbSolverOutput
    {
        PbSolverOutput out;
        std::istringstream lines{text};
        std::string line;
        while (std::getline(lines, line)) {
            if (! line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.rfind("s ", 0) == 0) {
                if (line.find("UNSATISFIABLE") != std::string::npos)
                    out.unsat = true;
                continue;
            }
            if (line != "v" && line.rfind("v ", 0) != 0)
                continue;
            std::istringstream split{line.substr(1)};
            std::string tok;
            while (split >> tok) {
                bool value = true;
                std::size_t at = 0;
                if (tok[0] == '-') {
                    value = false;
                    at = 1;
                }
                else if (tok[0] == '+')
                    at = 1;
                if (at + 1 >= tok.size() || tok[at] != 'x')
                    throw ParseError{"bad solution token '" + tok + "'"};
                int id = 0;
                try {
                    id = std::stoi(tok.substr(at + 1));
                }
                catch (const std::exception &) {
                    throw ParseError{"bad solution token '" + tok + "'"};
                }
                out.values.emplace_back(id, value);
            }
        }
        return out;
    }

    namespace
    {
        struct Enumerator
        {
            const PBModel & model;
            std::size_t limit;
            std::vector<std::vector<char>> found;
            std::vector<signed char> value;

            Enumerator(const PBModel & m, std::size_t lim) :
                model(m),
                limit(lim),
                value(m.vars.size(), -1)
            {
            }

            // returns false on conflict; assigns every variable whose other
            // value cannot satisfy some constraint
            auto propagate() -> bool
            {
                bool changed = true;
                while (changed) {
                    changed = false;
                    for (const auto & c : model.constraints) {
                        long long lo = 0, hi = 0;
                        for (const auto & t : c.terms) {
                            auto v = value[static_cast<std::size_t>(t.var)];
                            if (v < 0) {
                                lo += std::min(t.coef, 0LL);
                                hi += std::max(t.coef, 0LL);
                            }
                            else if (v == 1) {
                                lo += t.coef;
                                hi += t.coef;
                            }
                        }
                        auto feasible = [&] (long long l, long long h) {
                            return c.rel == PBRelation::Ge ? h >= c.rhs : h >= c.rhs && l <= c.rhs;
                        };
                        if (! feasible(lo, hi))
                            return false;
                        for (const auto & t : c.terms) {
                            if (value[static_cast<std::size_t>(t.var)] >= 0)
                                continue;
                            auto lo_rest = lo - std::min(t.coef, 0LL);
                            auto hi_rest = hi - std::max(t.coef, 0LL);
                            auto ok0 = feasible(lo_rest, hi_rest);
                            auto ok1 = feasible(lo_rest + t.coef, hi_rest + t.coef);
                            if (! ok0 && ! ok1)
                                return false;
                            if (ok0 != ok1) {
                                value[static_cast<std::size_t>(t.var)] = ok1 ? 1 : 0;
                                changed = true;
                                auto shift = ok1 ? t.coef : 0;
                                lo = lo_rest + shift;
                                hi = hi_rest + shift;
                            }
                        }
                    }
                }
                return true;
            }

            auto satisfied_exactly() const -> bool
            {
                for (const auto & c : model.constraints) {
                    long long sum = 0;
                    for (const auto & t : c.terms)
                        sum += value[static_cast<std::size_t>(t.var)] == 1 ? t.coef : 0;
                    if (c.rel == PBRelation::Ge ? sum < c.rhs : sum != c.rhs)
                        return false;
                }
                return true;
            }

            auto run() -> void
            {
                if (found.size() >= limit)
                    return;
                auto snapshot = value;
                if (! propagate()) {
                    value = snapshot;
                    return;
                }

                std::size_t pick = value.size();
                for (std::size_t i = 0; i < value.size(); ++i)
                    if (value[i] < 0) {
                        pick = i;
                        break;
                    }

                if (pick == value.size()) {
                    if (satisfied_exactly())
                        found.emplace_back(value.begin(), value.end());
                    value = snapshot;
                    return;
                }

                for (signed char b : {0, 1}) {
                    auto inner = value;
                    value[pick] = b;
                    run();
                    value = inner;
                    if (found.size() >= limit)
                        break;
                }
                value = snapshot;
            }
        };
    }

    auto enumerate_assignments(const PBModel & model, std::size_t limit) -> std::vector<std::vector<char>>
    {
        Enumerator en{model, limit};
        en.run();
        return en.found;
    }

    auto first_assignment(const PBModel & model) -> std::optional<std::vector<char>>
    {
        auto sols = enumerate_assignments(model, 1);
        if (sols.empty())
            return std::nullopt;
        return sols.front();
    }
}
