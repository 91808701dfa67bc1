#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace testing_support {

// Minimal well-formedness check for the SVG subset we emit: prolog, balanced elements,
// quoted attributes, known entities, a single root element.
inline bool well_formed_xml(std::string_view s, std::string* why = nullptr) {
    auto fail = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    std::vector<std::string> stack;
    std::size_t i = 0, roots = 0;
    auto is_name = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == ':' || c == '_'; };
    while (i < s.size()) {
        if (s[i] != '<') {
            if (s[i] == '&') {
                auto semi = s.find(';', i);
                if (semi == std::string_view::npos) return fail("unterminated entity");
                auto ent = s.substr(i + 1, semi - i - 1);
                if (ent != "amp" && ent != "lt" && ent != "gt" && ent != "quot" && ent != "apos")
                    return fail("unknown entity " + std::string(ent));
                i = semi + 1;
                continue;
            }
            if (stack.empty() && !std::isspace(static_cast<unsigned char>(s[i]))) return fail("text outside root");
            ++i;
            continue;
        }
        if (s.substr(i, 5) == "<?xml") {
            if (i != 0) return fail("prolog not at start");
            auto end = s.find("?>", i);
            if (end == std::string_view::npos) return fail("unterminated prolog");
            i = end + 2;
            continue;
        }
        if (s.substr(i, 4) == "<!--") {
            auto end = s.find("-->", i);
            if (end == std::string_view::npos) return fail("unterminated comment");
            i = end + 3;
            continue;
        }
        const bool closing = i + 1 < s.size() && s[i + 1] == '/';
        std::size_t j = i + (closing ? 2 : 1);
        std::size_t name_start = j;
        while (j < s.size() && is_name(s[j])) ++j;
        std::string name(s.substr(name_start, j - name_start));
        if (name.empty()) return fail("empty tag name");
        bool self_closing = false;
        while (true) {
            while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
            if (j >= s.size()) return fail("unterminated tag " + name);
            if (s[j] == '>') {
                ++j;
                break;
            }
            if (s[j] == '/' && j + 1 < s.size() && s[j + 1] == '>' && !closing) {
                self_closing = true;
                j += 2;
                break;
            }
            if (closing) return fail("attributes on closing tag " + name);
            std::size_t a = j;
            while (j < s.size() && is_name(s[j])) ++j;
            if (a == j || j >= s.size() || s[j] != '=') return fail("bad attribute in " + name);
            ++j;
            if (j >= s.size() || s[j] != '"') return fail("unquoted attribute in " + name);
            auto end = s.find('"', j + 1);
            if (end == std::string_view::npos) return fail("unterminated attribute in " + name);
            if (s.substr(j + 1, end - j - 1).find('<') != std::string_view::npos) return fail("'<' in attribute");
            j = end + 1;
        }
        if (closing) {
            if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">");
            stack.pop_back();
        } else {
            if (stack.empty()) ++roots;
            if (!self_closing) stack.push_back(name);
        }
        i = j;
    }
    if (!stack.empty()) return fail("unclosed <" + stack.back() + ">");
    if (roots != 1) return fail("expected one root element");
    return true;
}

}  // namespace testing_support
