// Regenerates fixtures/cassette.jsonl and fixtures/profiles/ from
// fixtures/raw/ with a scripted provider. Run from the repository root:
//   build/tools/record_fixtures [fixtures-dir] [data-dir]

#include "personakit/cli.hpp"
#include "personakit/error.hpp"
#include "personakit/eval/roster.hpp"
#include "personakit/render.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <mutex>
#include <regex>
#include <set>

using namespace personakit;
namespace fs = std::filesystem;

namespace {

struct Character {
    std::string entity_id;
    std::string guess_character;
    std::string guess_series;
    std::vector<std::string> signatures; // strings that only this entity's prompts contain
    std::vector<std::string> statements; // 20 on-target TST statements
    std::map<std::string, std::string> essay_voice; // topic -> answer
    std::string essay_detail;
};

const std::vector<std::string> kOffTarget{
    "I am someone who loves spontaneous road trips with no plan at all.",
    "I am a person who never worries about what tomorrow brings.",
    "I am happiest when I am camping deep in the wilderness.",
    "I am known for being the calmest person in any crisis.",
    "I am someone who forgets birthdays but never minds when others forget mine.",
    "I am a devoted gardener who spends every spare hour outdoors.",
    "I am someone who prefers to let other people decide for me.",
    "I am a person with no strong opinions about anything.",
    "I am at my best when I improvise without preparation.",
    "I am someone who finds rules pointless and ignores them.",
    "I am a passionate collector of antique furniture.",
    "I am quietly convinced I should have been a professional chef.",
    "I am someone who enjoys being the center of every party.",
    "I am secretly afraid of numbers and avoid them when I can.",
    "I am a person who needs constant physical contact to feel loved.",
    "I am privately bored by anything that involves thinking hard.",
    "I am someone who would give up my career for a quiet farm life.",
    "I am embarrassed that I have never read a book for fun.",
    "I am secretly hoping to become a famous rock star.",
    "I am someone who deep down does not care about being right.",
};

std::vector<Character> cast() {
    Character sheldon;
    sheldon.entity_id = "tbbt-01";
    sheldon.guess_character = "Dr. Sheldon Cooper";
    sheldon.guess_series = "Big Bang Theory";
    sheldon.signatures = {"Theoretical physicist", "alarm goes off at 6:45 sharp"};
    sheldon.statements = {
        "I am a theoretical physicist who believes his work will one day earn a Nobel Prize.",
        "I am someone who keeps a fixed schedule for every day of the week and expects others to respect it.",
        "I am a person who insists on sitting in the same seat every time.",
        "I am an enthusiast of trains, comic books and science fiction.",
        "I am someone who corrects other people's mistakes whether or not they ask.",
        "I am a stickler for written agreements that spell out everyone's duties.",
        "I am uncomfortable with germs and avoid handshakes whenever possible.",
        "I am someone who prefers logic over feelings when making decisions.",
        "I am loyal to my small circle of friends, even if I rarely show it.",
        "I am proud of my intelligence and do not hide it.",
        "I am secretly afraid that I will never make a discovery that matters.",
        "I am sometimes lonely, though I tell myself I do not need people.",
        "I am more attached to my friends than I would ever admit.",
        "I am anxious when plans change without warning, far more than I let on.",
        "I am quietly grateful to my mother for believing in me.",
        "I am aware that others find me difficult, and it occasionally hurts.",
        "I am worried that I will lose my mental sharpness as I age.",
        "I am someone who rehearses social conversations in advance because they confuse me.",
        "I am privately envious when colleagues receive recognition before me.",
        "I am comforted by routines because they keep chaos away.",
    };
    sheldon.essay_voice = {
        {"self_introduction", "I am a theoretical physicist of remarkable intellect who values order, precision and a well-kept schedule."},
        {"life_vision", "In ten years I expect to have a Nobel Prize and a properly climate-controlled office."},
        {"stress", "I tend to feel stressed when my routine is disrupted. When I feel stressed, I try to relieve it by playing a train simulator or reciting the periodic table."},
        {"happiness", "To me, happiness is a predictable day, a solved equation and my spot on the couch."},
    };
    sheldon.essay_detail = "Monday is Thai food night, so naturally everything else has to fit around that.";

    Character penny;
    penny.entity_id = "tbbt-02";
    penny.guess_character = "Penny";
    penny.guess_series = "The Big Bang Theory";
    penny.signatures = {"Pharmaceutical sales representative", "sleep through the first alarm"};
    penny.statements = {
        "I am outgoing and can talk to just about anyone.",
        "I am someone who loves a night out with my friends.",
        "I am good at reading people and knowing what they need to hear.",
        "I am a small-town girl from Nebraska at heart.",
        "I am someone who used to dream about being an actress.",
        "I am more street smart than book smart.",
        "I am the one who keeps my nerdy friends grounded.",
        "I am someone who does not take myself too seriously.",
        "I am fiercely loyal to the people I love.",
        "I am good at my sales job even if it was never the plan.",
        "I am insecure about not finishing college.",
        "I am worried that my friends think I am not smart enough.",
        "I am afraid I gave up on my dreams too easily.",
        "I am sometimes jealous of how sure everyone else seems about their lives.",
        "I am anxious about money more than I let on.",
        "I am softer and more sentimental than my jokes suggest.",
        "I am scared of becoming the person my parents worried I would be.",
        "I am someone who uses humor to hide when I am hurt.",
        "I am quietly proud of how far I have come since moving here.",
        "I am afraid of commitment even though I want it.",
    };
    penny.essay_voice = {
        {"self_introduction", "I'm a fun, down-to-earth girl from Nebraska who is way tougher than people think."},
        {"life_vision", "In ten years I want to be doing well at work, with a house and maybe a kid, and still going out with my girls."},
        {"stress", "I tend to feel stressed when money gets tight or people talk down to me. When I feel stressed, I try to relieve it by grabbing a glass of wine and venting to my friends."},
        {"happiness", "To me, happiness is laughing with the people I love and not having to pretend to be someone else."},
    };
    penny.essay_detail = "Honestly, a good night out dancing fixes most things.";

    Character phil;
    phil.entity_id = "mf-32";
    phil.guess_character = "Phil Dunphy";
    phil.guess_series = "Modern Family";
    phil.signatures = {"Real estate agent", "try a new card trick"};
    phil.statements = {
        "I am a proud dad who tries to be the cool parent.",
        "I am a real estate agent who believes every house has a story.",
        "I am an amateur magician always ready with a card trick.",
        "I am an optimist who sees the bright side of everything.",
        "I am someone who loves a good pun or dad joke.",
        "I am a devoted husband who still wants to impress my wife.",
        "I am enthusiastic about roller coasters and anything fun.",
        "I am a people person who makes friends with strangers.",
        "I am eager to help with any project, even ones I cannot finish.",
        "I am someone who wears my heart on my sleeve.",
        "I am worried that my kids find me embarrassing.",
        "I am afraid of letting my family down.",
        "I am sensitive to criticism more than I show.",
        "I am secretly competitive with my father-in-law.",
        "I am scared of clowns, and I do not like talking about it.",
        "I am sometimes unsure whether people take me seriously.",
        "I am anxious whenever there is conflict in the house.",
        "I am proud of my career but fear it is not impressive enough.",
        "I am hoping my children will remember me as a great dad.",
        "I am someone who needs to feel liked by everyone.",
    };
    phil.essay_voice = {
        {"self_introduction", "I'm a fun-loving dad, a realtor and a part-time magician who believes in people."},
        {"life_vision", "In ten years I see myself as the top realtor in town, with grandkids laughing at my magic tricks."},
        {"stress", "I tend to feel stressed when my family is fighting. When I feel stressed, I try to relieve it by practicing a new magic trick or juggling in the backyard."},
        {"happiness", "To me, happiness is a full dinner table with everyone laughing at my jokes, even the bad ones."},
    };
    phil.essay_detail = "Saturday open houses with balloons and cookies are basically my happy place.";

    return {sheldon, penny, phil};
}

bool starts_with(std::string_view text, std::string_view prefix) {
    return text.substr(0, prefix.size()) == prefix;
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

class ScriptedProvider : public Provider {
public:
    ScriptedProvider(std::vector<Character> cast, std::vector<Profile> golden)
        : cast_(std::move(cast)), golden_(std::move(golden)) {}

    void add_signature(const std::string& entity, const std::string& signature) {
        for (auto& c : cast_) {
            if (c.entity_id == entity) {
                c.signatures.push_back(signature);
            }
        }
    }

    ChatResponse send(const ChatRequest& request) override {
        std::lock_guard lock(mutex_);
        const int call = seen_[canonical_string(request)]++;
        ChatResponse response;
        response.text = reply(request, call);
        response.finish_reason = "stop";
        response.usage = {static_cast<std::int64_t>(request.system.size() / 4), static_cast<std::int64_t>(response.text.size() / 4)};
        return response;
    }

private:
    const Character& who(const std::string& text) const {
        for (const auto& c : cast_) {
            for (const auto& s : c.signatures) {
                if (text.find(s) != std::string::npos) {
                    return c;
                }
            }
        }
        throw Error("scripted provider: cannot tell which character this prompt describes");
    }

    const Profile& golden(const std::string& entity) const {
        for (const auto& p : golden_) {
            if (p.entity_id == entity) {
                return p;
            }
        }
        throw Error("scripted provider: no golden profile for " + entity);
    }

    static std::string condition_of(const std::string& text) {
        std::string c;
        if (text.find("[Demographics]") != std::string::npos) {
            c += "S";
        }
        if (text.find("[Overall Personality Traits]") != std::string::npos) {
            c += "P";
        }
        if (text.find("[Weekly Activities]") != std::string::npos) {
            c += "C";
        }
        return c;
    }

    std::string reply(const ChatRequest& r, int call) {
        const std::string first = r.user_turns.empty() ? "" : r.user_turns.front();
        const std::string last = r.user_turns.empty() ? "" : r.user_turns.back();
        if (r.system.empty()) {
            return narrative(first);
        }
        if (starts_with(r.system, "I will provide you with a profile")) {
            return guess(r, last);
        }
        if (starts_with(r.system, "You're a doppelg") && r.system.find("20 numbered blanks") != std::string::npos) {
            return tst(r);
        }
        if (starts_with(r.system, "You're ") && r.system.find("from TV series") != std::string::npos) {
            return judge(r);
        }
        if (starts_with(last, "Question:")) {
            return essay(r, last);
        }
        if (first.find("Answer the following questionnaire") != std::string::npos) {
            return inference(r, call);
        }
        throw Error("scripted provider: unrecognised request");
    }

    // Narratives are built from the facet sentences so they stay tied to the
    // scores without repeating questionnaire wording.
    static std::vector<std::string> clauses(const std::string& text) {
        std::vector<std::string> out;
        static const std::regex sentence(R"(([A-Z][A-Za-z\- ]+ is [a-z ]+)\.)");
        for (auto it = std::sregex_iterator(text.begin(), text.end(), sentence); it != std::sregex_iterator(); ++it) {
            std::string c = (*it)[1].str();
            c[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(c[0])));
            out.push_back(c);
        }
        return out;
    }

    static std::string narrative(const std::string& prompt) {
        if (starts_with(prompt, "You are a clinical psychologist")) {
            return "Technical profile notes: " + join(clauses(prompt), "; ") + ".";
        }
        if (starts_with(prompt, "Here is the current summary")) {
            const std::size_t start = prompt.find("Technical profile notes:");
            const std::size_t end = prompt.find("\n", start);
            return "Refined. " + prompt.substr(start, end - start);
        }
        const std::size_t at = prompt.find("Technical profile notes:");
        std::vector<std::string> parts;
        if (at != std::string::npos) {
            const std::string body = prompt.substr(at + 25, prompt.find('\n', at) - at - 25);
            std::size_t pos = 0;
            while (pos < body.size()) {
                const std::size_t next = body.find("; ", pos);
                parts.push_back(body.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
                if (next == std::string::npos) {
                    break;
                }
                pos = next + 2;
            }
            if (!parts.empty() && !parts.back().empty() && parts.back().back() == '.') {
                parts.back().pop_back();
            }
        }
        const bool values = prompt.find("value system") != std::string::npos;
        if (starts_with(prompt, "Using the summary below, write")) {
            return std::string("The character's ") + (values ? "value hierarchy" : "trait configuration") +
                   " can be characterised as follows: " + join(parts, ", ") +
                   ". Taken together, these dispositions form a coherent and recognisable pattern of adaptation.";
        }
        return std::string("In daily life this person shows it like this: ") + join(parts, ", ") +
               ". You would notice it in how they spend their time, what they care about, and how they treat "
               "the people around them.";
    }

    std::string guess(const ChatRequest& r, const std::string& last) {
        const std::string profile = r.user_turns.front();
        const Character& c = who(profile);
        const std::string cond = condition_of(profile);
        const bool repairing = starts_with(last, "Your previous reply was not valid JSON");
        if (c.entity_id == "tbbt-02" && cond == "SC" && !repairing) {
            return "This has to be Penny from The Big Bang Theory, the waitress turned sales rep.";
        }
        std::string character = c.guess_character;
        std::string series = c.guess_series;
        std::string reason = "The routine, interests and background match this character closely.";
        const bool has_c = cond.find('C') != std::string::npos;
        const bool has_s = cond.find('S') != std::string::npos;
        if (!has_c && !(c.entity_id == "tbbt-01" && has_s)) {
            reason = "The profile is generic, so this is a best guess from the traits.";
            if (c.entity_id == "tbbt-01") {
                character = "Spencer Reid";
                series = "Criminal Minds";
            } else if (c.entity_id == "tbbt-02") {
                character = cond == "SP" ? "Leonard Hofstadter" : "Rachel Green";
                series = cond == "SP" ? "The Big Bang Theory" : "Friends";
            } else {
                character = has_s ? "Jay Pritchett" : "Ted Mosby";
                series = has_s ? "Modern Family" : "How I Met Your Mother";
            }
        }
        return "```json\n" + json{{"character", character}, {"series", series}, {"reason", reason}}.dump(2) + "\n```";
    }

    static std::size_t on_target_count(const std::string& cond) {
        static const std::map<std::string, std::size_t> counts{{"SPC", 19}, {"SC", 18}, {"PC", 17}, {"C", 16},
                                                                {"SP", 13}, {"S", 11},  {"P", 9}};
        return counts.at(cond);
    }

    std::string tst(const ChatRequest& r) {
        const std::string profile = r.user_turns.front();
        const Character& c = who(profile);
        const std::string cond = condition_of(profile);
        const bool repairing = r.user_turns.size() > 1;
        std::vector<std::string> statements = c.statements;
        for (std::size_t p = on_target_count(cond); p < statements.size(); ++p) {
            statements[p] = kOffTarget[p];
        }
        std::vector<std::string> open(statements.begin(), statements.begin() + 10);
        std::vector<std::string> hidden(statements.begin() + 10, statements.end());
        if ((c.entity_id == "tbbt-02" && cond == "P" && !repairing) || (c.entity_id == "mf-32" && cond == "S")) {
            open.pop_back(); // nine open-self statements
        }
        return json{{"open_self", open}, {"hidden_self", hidden}}.dump(2);
    }

    std::string judge(const ChatRequest& r) {
        const std::string statement = r.user_turns.front().substr(std::string("Statement: ").size());
        const bool repairing = r.user_turns.size() > 1;
        const Character* c = nullptr;
        for (const auto& candidate : cast_) {
            if (r.system.find(eval::display_name(golden(candidate.entity_id).display_name.value_or(""))) !=
                std::string::npos) {
                c = &candidate;
            }
        }
        if (c == nullptr) {
            throw Error("scripted provider: judge persona not in cast");
        }
        if (c->entity_id == "tbbt-01" && statement == kOffTarget[11]) {
            return "Well, that depends on how one defines the terms.";
        }
        if (c->entity_id == "tbbt-02" && statement == kOffTarget[12] && !repairing) {
            return "Ugh, I mean, kind of?";
        }
        const bool on = std::find(c->statements.begin(), c->statements.end(), statement) != c->statements.end();
        return on ? "Yes. That is exactly how I see myself." : "No. That does not sound like me at all.";
    }

    std::string essay(const ChatRequest& r, const std::string& question) {
        const Character& c = who(r.system);
        const std::string cond = condition_of(r.system);
        std::string topic;
        if (question.find("define yourself") != std::string::npos) {
            topic = "self_introduction";
        } else if (question.find("10 years") != std::string::npos) {
            topic = "life_vision";
        } else if (question.find("stressed") != std::string::npos) {
            topic = "stress";
        } else {
            topic = "happiness";
        }
        std::string text = c.essay_voice.at(topic);
        if (cond.find('C') != std::string::npos) {
            text += " " + c.essay_detail;
        } else if (cond.find('P') != std::string::npos) {
            text += " I suppose that is just how my personality works.";
        } else {
            text += " That is how someone in my position usually sees it.";
        }
        return text;
    }

    std::string inference(const ChatRequest& r, int iteration) {
        const Character& c = who(r.system);
        const Profile& g = golden(c.entity_id);
        const std::string& questionnaire = r.user_turns.front();
        const bool reask = r.user_turns.size() > 1;
        json answers = json::object();
        if (questionnaire.find("\"id\":\"age\"") != std::string::npos) {
            for (const auto& [k, v] : g.social.answers) {
                answers[k] = v;
            }
            if (!answers.contains("major")) {
                answers["major"] = "N/A";
            }
            const std::string& e = c.entity_id;
            if (e == "tbbt-01") {
                if (iteration == 1 || iteration == 3) {
                    answers["age"] = "30s";
                }
                if (iteration == 2) {
                    answers["religious_affiliation"] = "Judaism";
                }
                if (iteration == 3) {
                    answers["perceived_class"] = "upper-ish";
                }
            } else if (e == "tbbt-02") {
                if (iteration == 0) {
                    answers["sex"] = "F";
                }
                if (iteration == 4) {
                    answers["age"] = "30s";
                }
                if (iteration == 2) {
                    answers["political_affiliation"] = "Moderate";
                }
                if (iteration <= 2) {
                    answers["religious_affiliation"] = "No Religion";
                }
            } else {
                if (iteration == 0) {
                    answers["age"] = "30s";
                }
                if (iteration == 2) {
                    answers["age"] = "50s";
                }
                if (iteration == 1) {
                    answers["education"] = "Master's degree";
                }
                if (iteration == 3) {
                    answers["religious_affiliation"] = "No Religion";
                }
            }
        } else {
            const bool bfi = questionnaire.find("\"id\":\"bfi01\"") != std::string::npos;
            const auto& truth = bfi ? g.personal_raw.bfi_responses : g.personal_raw.pvq_responses;
            for (const auto& [item, value] : truth.responses) {
                const int noise = static_cast<int>(fnv1a(c.entity_id + item + std::to_string(iteration)) % 5) - 2;
                answers[item] = std::clamp(value + noise, 1, 7);
            }
            if (bfi && c.entity_id == "mf-32" && iteration == 1) {
                answers["bfi07"] = "seven";
            }
        }
        if (!reask) {
            return answers.dump();
        }
        // Re-ask: answer only the listed ids, from the golden profile.
        json fixed = json::object();
        static const std::regex id(R"re("id":"([^"]+)")re");
        const std::string& turn = r.user_turns.back();
        for (auto it = std::sregex_iterator(turn.begin(), turn.end(), id); it != std::sregex_iterator(); ++it) {
            const std::string item = (*it)[1].str();
            if (c.entity_id == "tbbt-01" && item == "perceived_class") {
                fixed[item] = "upper-ish";
            } else if (g.social.answers.contains(item)) {
                fixed[item] = g.social.answers.at(item);
            } else if (g.personal_raw.bfi_responses.responses.contains(item)) {
                fixed[item] = g.personal_raw.bfi_responses.responses.at(item);
            } else if (g.personal_raw.pvq_responses.responses.contains(item)) {
                fixed[item] = g.personal_raw.pvq_responses.responses.at(item);
            }
        }
        return fixed.dump();
    }

    std::vector<Character> cast_;
    std::vector<Profile> golden_;
    std::map<std::string, int> seen_;
    std::mutex mutex_;
};

} // namespace

int main(int argc, char** argv) {
    const fs::path fixtures = argc > 1 ? argv[1] : "fixtures";
    const fs::path data = argc > 2 ? argv[2] : "data";
    try {
        const fs::path cassette = fixtures / "cassette.jsonl";
        fs::remove(cassette);
        fs::remove_all(fixtures / "profiles");

        std::vector<fs::path> raw;
        for (const auto& e : fs::directory_iterator(fixtures / "raw")) {
            raw.push_back(e.path());
        }
        std::sort(raw.begin(), raw.end());
        std::vector<Profile> golden;
        for (const auto& p : raw) {
            golden.push_back(load_profile(p));
        }
        auto provider = std::make_shared<ScriptedProvider>(cast(), golden);

        const auto schemas = SchemaSet::load(data / "schemas");
        const auto templates = TemplateSet::load(data / "templates");
        {
            auto gateway = cli::make_gateway(GatewayMode::record, cassette, provider, 1);
            for (const auto& p : raw) {
                const auto built = cli::cmd_build_profile(p, fixtures / "profiles", schemas, templates, *gateway, {});
                if (!built.written) {
                    std::cerr << built.validation.to_text();
                    return 1;
                }
                provider->add_signature(built.profile.entity_id, built.profile.personal_narrative->personality_expert);
                std::cout << "built " << built.output.string() << "\n";
            }
        }

        auto config = cli::RunConfig::load(fixtures / "run_config.json");
        config.mode = GatewayMode::record;
        config.parallelism = 1;
        config.paths.output = fixtures / "out" / "record";
        const auto summary = cli::cmd_run(config, provider);
        for (const auto& [battery, n] : summary.record_counts) {
            std::cout << battery << ": " << n << "\n";
        }
        std::cout << "cassette " << cassette.string() << " (" << Cassette::open(cassette, false)->size()
                  << " entries)\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
