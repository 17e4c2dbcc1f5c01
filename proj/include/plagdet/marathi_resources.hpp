#pragma once

// Bundled Marathi resources. Kept byte-identical to data/stopwords_mr.txt
// (stopwords-iso Marathi list) and data/suffixes_mr.txt.

#include <string_view>

namespace plagdet::preprocess::resources {

inline constexpr std::string_view kMarathiStopwords = R"plagdet(अधिक
अनेक
अशी
असलयाचे
असलेल्या
असा
असून
असे
आज
आणि
आता
आपल्या
आला
आली
आले
आहे
आहेत
एक
एका
कमी
करणयात
करून
का
काम
काय
काही
किवा
की
केला
केली
केले
कोटी
गेल्या
घेऊन
जात
झाला
झाली
झाले
झालेल्या
टा
डॉ
तर
तरी
तसेच
ता
ती
तीन
ते
तो
त्या
त्याचा
त्याची
त्याच्या
त्याना
त्यानी
त्यामुळे
त्री
दिली
दोन
न
नाही
निर्ण्य
पण
पम
परयतन
पाटील
म
मात्र
माहिती
मी
मुबी
म्हणजे
म्हणाले
म्हणून
या
याचा
याची
याच्या
याना
यानी
येणार
येत
येथील
येथे
लाख
व
व्यकत
सर्व
सागित्ले
सुरू
हजार
हा
ही
हे
होणार
होत
होता
होती
होते
)plagdet";

inline constexpr std::string_view kMarathiSuffixes = R"plagdet(min_stem_len=2
# Common Marathi inflectional suffixes (case markers, postpositions,
# plural/oblique vowel signs). Replaceable data: the stemmer strips the
# single longest listed suffix that leaves at least min_stem_len
# grapheme clusters.
मध्ये
पर्यंत
साठी
कडून
कडे
मुळे
हून
ांच्या
ांनी
ांना
च्या
तील
ची
चा
चे
ला
ना
ने
नी
शी
वर
ही
ून
त
ा
े
ी
)plagdet";

} // namespace plagdet::preprocess::resources
