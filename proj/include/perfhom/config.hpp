#ifndef PERFHOM_CONFIG_HPP
#define PERFHOM_CONFIG_HPP

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace perfhom {

// Flat key-value text with [section] headers and '#' comments. Order is
// preserved so configs round-trip through serialization losslessly.
class Config {
public:
    struct Entry {
        std::string section, key, value;
    };

    static Config parse(const std::string& text) {
        Config c;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip(line);
            if (s.empty() || s[0] == '#') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw std::invalid_argument("config: malformed section at line " +
                                                std::to_string(lineno));
                section = strip(s.substr(1, s.size() - 2));
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config: expected key = value at line " +
                                            std::to_string(lineno));
            c.entries_.push_back({section, strip(s.substr(0, eq)), strip(s.substr(eq + 1))});
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("config: cannot open " + path);
        std::stringstream ss;
        ss << f.rdbuf();
        return parse(ss.str());
    }

    std::string serialize() const {
        std::ostringstream out;
        std::string current;
        bool first = true;
        for (const auto& e : entries_) {
            if (e.section != current || first) {
                if (!first) out << "\n";
                out << "[" << e.section << "]\n";
                current = e.section;
                first = false;
            }
            out << e.key << " = " << e.value << "\n";
        }
        return out.str();
    }

    bool has(const std::string& section, const std::string& key) const {
        return find(section, key) != nullptr;
    }
    std::string get(const std::string& section, const std::string& key) const {
        const Entry* e = find(section, key);
        if (!e) throw std::out_of_range("config: missing " + section + "." + key);
        return e->value;
    }
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const {
        const Entry* e = find(section, key);
        return e ? e->value : fallback;
    }
    double get_double(const std::string& section, const std::string& key, double fallback) const {
        const Entry* e = find(section, key);
        return e ? std::stod(e->value) : fallback;
    }
    long get_int(const std::string& section, const std::string& key, long fallback) const {
        const Entry* e = find(section, key);
        return e ? std::stol(e->value) : fallback;
    }
    void set(const std::string& section, const std::string& key, const std::string& value) {
        for (auto& e : entries_)
            if (e.section == section && e.key == key) {
                e.value = value;
                return;
            }
        entries_.push_back({section, key, value});
    }
    const std::vector<Entry>& entries() const { return entries_; }

    static std::vector<double> parse_list(const std::string& s) {
        std::vector<double> out;
        std::string item;
        std::istringstream in(s);
        while (std::getline(in, item, ',')) {
            std::string t = strip(item);
            if (!t.empty()) out.push_back(std::stod(t));
        }
        return out;
    }

private:
    static std::string strip(const std::string& s) {
        size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }
    const Entry* find(const std::string& section, const std::string& key) const {
        for (const auto& e : entries_)
            if (e.section == section && e.key == key) return &e;
        return nullptr;
    }
    std::vector<Entry> entries_;
};

}  // namespace perfhom

#endif
