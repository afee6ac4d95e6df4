#include "toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <sstream>
#include <vector>

namespace pathflow::app {

namespace {

using Json = nlohmann::ordered_json;

struct Cursor {
    const std::string& s;
    std::size_t pos = 0;
    std::size_t line = 0;

    void skip_ws()
    {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t'))
            ++pos;
    }
    bool done() const { return pos >= s.size(); }
    char peek() const { return done() ? '\0' : s[pos]; }
    [[noreturn]] void fail(const std::string& what) const { throw toml_error(line, what); }
};

std::string strip_comment(const std::string& l)
{
    bool in_str = false;
    for (std::size_t i = 0; i < l.size(); ++i) {
        if (l[i] == '"' && (i == 0 || l[i - 1] != '\\'))
            in_str = !in_str;
        else if (l[i] == '#' && !in_str)
            return l.substr(0, i);
    }
    return l;
}

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_key(const std::string& key, std::size_t line)
{
    std::vector<std::string> parts;
    std::stringstream ss(key);
    std::string p;
    while (std::getline(ss, p, '.')) {
        p = trim(p);
        if (p.size() >= 2 && p.front() == '"' && p.back() == '"')
            p = p.substr(1, p.size() - 2);
        if (p.empty())
            throw toml_error(line, "empty key segment in '" + key + "'");
        parts.push_back(p);
    }
    if (parts.empty())
        throw toml_error(line, "missing key");
    return parts;
}

Json parse_value(Cursor& c);

Json parse_string(Cursor& c)
{
    ++c.pos;
    std::string out;
    while (!c.done() && c.peek() != '"') {
        char ch = c.s[c.pos++];
        if (ch == '\\') {
            if (c.done())
                c.fail("unterminated escape");
            const char e = c.s[c.pos++];
            switch (e) {
            case 'n': ch = '\n'; break;
            case 't': ch = '\t'; break;
            case '"': ch = '"'; break;
            case '\\': ch = '\\'; break;
            default: c.fail(std::string("unsupported escape \\") + e);
            }
        }
        out.push_back(ch);
    }
    if (c.done())
        c.fail("unterminated string");
    ++c.pos;
    return out;
}

Json parse_array(Cursor& c)
{
    ++c.pos;
    Json arr = Json::array();
    for (;;) {
        c.skip_ws();
        if (c.peek() == ']') {
            ++c.pos;
            return arr;
        }
        arr.push_back(parse_value(c));
        c.skip_ws();
        if (c.peek() == ',') {
            ++c.pos;
            continue;
        }
        if (c.peek() == ']') {
            ++c.pos;
            return arr;
        }
        c.fail("expected ',' or ']' in array");
    }
}

Json parse_scalar(Cursor& c)
{
    const std::size_t start = c.pos;
    while (!c.done() && c.peek() != ',' && c.peek() != ']' && c.peek() != ' ' && c.peek() != '\t')
        ++c.pos;
    std::string tok = c.s.substr(start, c.pos - start);
    if (tok == "true")
        return true;
    if (tok == "false")
        return false;
    if (tok == "inf" || tok == "+inf" || tok == "-inf" || tok == "nan")
        c.fail("non-finite numbers are not accepted");
    std::erase(tok, '_');
    const bool is_int = tok.find_first_of(".eE") == std::string::npos;
    if (is_int) {
        std::int64_t v = 0;
        const char* b = tok.data() + (tok.starts_with('+') ? 1 : 0);
        const auto [p, ec] = std::from_chars(b, tok.data() + tok.size(), v);
        if (ec == std::errc() && p == tok.data() + tok.size())
            return v;
    } else {
        double v = 0.0;
        const char* b = tok.data() + (tok.starts_with('+') ? 1 : 0);
        const auto [p, ec] = std::from_chars(b, tok.data() + tok.size(), v);
        if (ec == std::errc() && p == tok.data() + tok.size())
            return v;
    }
    c.fail("cannot parse value '" + tok + "'");
}

Json parse_value(Cursor& c)
{
    c.skip_ws();
    switch (c.peek()) {
    case '"': return parse_string(c);
    case '[': return parse_array(c);
    case '\0': c.fail("missing value");
    default: return parse_scalar(c);
    }
}

Json& descend(Json& root, const std::vector<std::string>& path, std::size_t n, std::size_t line)
{
    Json* cur = &root;
    for (std::size_t i = 0; i < n; ++i) {
        Json& next = (*cur)[path[i]];
        if (next.is_null())
            next = Json::object();
        else if (!next.is_object())
            throw toml_error(line, "key '" + path[i] + "' is not a table");
        cur = &next;
    }
    return *cur;
}

}  // namespace

nlohmann::ordered_json parse_toml(const std::string& text)
{
    Json root = Json::object();
    std::vector<std::string> table;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string l = trim(strip_comment(raw));
        if (l.empty())
            continue;
        if (l.front() == '[') {
            if (l.size() < 3 || l.back() != ']' || l[1] == '[')
                throw toml_error(line, "malformed table header");
            table = split_key(l.substr(1, l.size() - 2), line);
            descend(root, table, table.size(), line);
            continue;
        }
        const auto eq = l.find('=');
        if (eq == std::string::npos)
            throw toml_error(line, "expected key = value");
        auto key = split_key(l.substr(0, eq), line);
        std::vector<std::string> full = table;
        full.insert(full.end(), key.begin(), key.end());
        Json& parent = descend(root, full, full.size() - 1, line);
        if (parent.contains(full.back()))
            throw toml_error(line, "duplicate key '" + full.back() + "'");
        const std::string rest = l.substr(eq + 1);
        Cursor c{rest, 0, line};
        Json v = parse_value(c);
        c.skip_ws();
        if (!c.done())
            c.fail("trailing characters after value");
        parent[full.back()] = std::move(v);
    }
    return root;
}

}  // namespace pathflow::app
