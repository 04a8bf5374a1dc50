#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace irtime {

// Deterministic JSON emitter for the output file formats: fields appear in
// insertion order and reals are printed with 17 significant digits, so a
// rerun with identical inputs produces byte-identical files. Non-finite
// reals are emitted as null (callers carry an explicit flag alongside).
class JsonWriter {
public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(std::string_view k);

    JsonWriter& value(double v);
    JsonWriter& value(std::int64_t v);
    JsonWriter& value(std::uint64_t v);
    JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
    JsonWriter& value(bool v);
    JsonWriter& value(std::string_view v);
    JsonWriter& value(const char* v) { return value(std::string_view(v)); }
    JsonWriter& null();

    // key + scalar in one call
    template <typename T>
    JsonWriter& field(std::string_view k, const T& v) {
        key(k);
        return value(v);
    }

    std::string str() const { return out_; }

    static std::string format_double(double v);
    static std::string escape(std::string_view s);

private:
    void before_value();
    void newline_indent();

    std::string out_;
    // stack entry: true = object, false = array; paired with "has items" flag
    std::vector<std::pair<bool, bool>> stack_;
    bool pending_key_ = false;
};

} // namespace irtime
