#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "txflow/csv.hpp"
#include "txflow/error.hpp"
#include "txflow/ingest.hpp"

namespace txflow::ingest {

namespace {

using nlohmann::json;

TransferRecord parse_csv_record(const std::vector<std::string>& fields) {
    if (fields.size() != 4) throw DataError("expected 4 fields (tx_id,timestamp,inputs,outputs), got " +
                                            std::to_string(fields.size()));
    TransferRecord rec;
    rec.tx_id = std::string(csv::trim(fields[0]));
    rec.timestamp = parse_timestamp(csv::trim(fields[1]));
    for (auto piece : csv::split(fields[2], ';')) {
        piece = csv::trim(piece);
        if (!piece.empty()) rec.inputs.emplace_back(piece);
    }
    for (auto piece : csv::split(fields[3], ';')) {
        piece = csv::trim(piece);
        if (piece.empty()) continue;
        const auto colon = piece.rfind(':');
        if (colon == std::string_view::npos) throw DataError("output '" + std::string(piece) + "' lacks ':amount'");
        rec.outputs.push_back({std::string(csv::trim(piece.substr(0, colon))),
                               Amount::parse(csv::trim(piece.substr(colon + 1)))});
    }
    return rec;
}

Amount json_amount(const json& value) {
    if (value.is_string()) return Amount::parse(value.get<std::string>());
    if (value.is_number_unsigned() || value.is_number_integer()) {
        if (value.get<std::int64_t>() < 0) throw DataError("negative amount");
        return Amount::parse(std::to_string(value.get<std::int64_t>()));
    }
    if (value.is_number_float()) {
        const double v = value.get<double>();
        if (v < 0) throw DataError("negative amount");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.8f", v);
        return Amount::parse(buf);
    }
    throw DataError("amount must be a number or decimal string");
}

TransferRecord parse_json_record(std::string_view line) {
    json obj = json::parse(line);
    if (!obj.is_object()) throw DataError("record is not a JSON object");
    TransferRecord rec;
    rec.tx_id = obj.at("tx_id").get<std::string>();
    rec.timestamp = parse_timestamp(obj.at("timestamp").get<std::string>());
    for (const auto& a : obj.at("inputs")) rec.inputs.push_back(a.get<std::string>());
    for (const auto& o : obj.at("outputs")) {
        if (o.is_array()) {
            if (o.size() != 2) throw DataError("output pair must have 2 elements");
            rec.outputs.push_back({o[0].get<std::string>(), json_amount(o[1])});
        } else {
            rec.outputs.push_back({o.at("address").get<std::string>(), json_amount(o.at("amount"))});
        }
    }
    return rec;
}

std::string guess_tx_id(std::string_view line, bool is_json) {
    if (is_json) {
        try {
            auto obj = json::parse(line);
            if (obj.is_object() && obj.contains("tx_id") && obj["tx_id"].is_string())
                return obj["tx_id"].get<std::string>();
        } catch (const std::exception&) {
        }
        return {};
    }
    auto comma = line.find(',');
    return std::string(csv::trim(line.substr(0, comma)));
}

}  // namespace

RecordSet parse_records(std::istream& in, const RecordReadOptions& options) {
    RecordSet out;
    std::string line;
    std::size_t lineno = 0;
    int format = -1;  // 0 csv, 1 json
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = csv::trim(line);
        if (body.empty()) continue;
        if (format < 0) {
            format = body.front() == '{' ? 1 : 0;
            if (format == 0 && body.rfind("tx_id", 0) == 0) continue;  // header
        }
        try {
            TransferRecord rec;
            if (format == 1) {
                rec = parse_json_record(body);
            } else {
                rec = parse_csv_record(csv::split_line(body));
            }
            validate(rec, options.bounds);
            out.records.push_back(std::move(rec));
        } catch (const std::exception& e) {
            RecordError err{lineno, guess_tx_id(body, format == 1), e.what()};
            if (options.strict)
                throw DataError("line " + std::to_string(lineno) + " (tx '" + err.tx_id + "'): " + err.message);
            out.errors.push_back(std::move(err));
        }
    }
    return out;
}

RecordSet read_records(const std::filesystem::path& path, const RecordReadOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read records file " + path.string());
    return parse_records(in, options);
}

void write_records_csv(std::ostream& out, std::span<const TransferRecord> records) {
    out << "tx_id,timestamp,inputs,outputs\n";
    for (const auto& r : records) {
        std::string inputs, outputs;
        for (std::size_t i = 0; i < r.inputs.size(); ++i) inputs += (i ? ";" : "") + r.inputs[i];
        for (std::size_t i = 0; i < r.outputs.size(); ++i)
            outputs += (i ? ";" : "") + r.outputs[i].address + ":" + r.outputs[i].amount.to_string();
        csv::write_row(out, {r.tx_id, format_timestamp(r.timestamp), inputs, outputs});
    }
}

}  // namespace txflow::ingest
