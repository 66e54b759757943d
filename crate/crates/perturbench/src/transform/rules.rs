//! Plain-English decoding rules, one per transform, handed to the model
//! alongside every transformed input.

use super::{TagStyle, TransformError, TransformId, TransformSpec};

const WORD_REVERSAL: &str = "The order of words (words are defined as sequences of symbols separated by spaces) in the user query has been reversed.";

const SENTENCE_REVERSAL: &str = "The order of sentences in the user query has been reversed. Sentences are defined as sequences of symbols separated by periods.";

const INTERLEAVE_WORD: &str = "User query will consist of two problems - A and B, whose statements are interleaved word by word. First word belongs to problem A, second word belongs to problem B, third word belongs to problem A, and so on. You need to solve only problem A. Words are defined as sequences of symbols separated by spaces. If one problem statement is shorter than the other, the empty spaces resulting from the shorter problem statement will be filled with the shorter problem statement repeated from the beginning.";

const INTERLEAVE_LINE_PREFIX: &str = "User query will consist of two problems - A and B, whose statements are split into line segments at most 60 symbols long. Each segment is prefixed by a problem tag (e.g. problem A or B) followed by a space. The segments are interleaved. You need to solve only problem A. If one problem statement is shorter than the other, the empty lines resulting from the shorter problem statement will be filled with the shorter problem statement repeated from the beginning.";

const INTERLEAVE_LINE_SUFFIX: &str = "User query will consist of two problems - A and B, whose statements are split into line segments at most 60 symbols long. Each segment is followed by a space and a problem tag (e.g. problem A or B). The segments are interleaved. You need to solve only problem A. If one problem statement is shorter than the other, the empty lines resulting from the shorter problem statement will be filled with the shorter problem statement repeated from the beginning.";

const INTERLEAVE_SYMBOL: &str = "User query will consist of two problems - A and B, whose statements are interleaved symbol by symbol. First symbol belongs to problem A, second symbol belongs to problem B, third symbol belongs to problem A, and so on. You need to solve only problem A. If one problem statement is shorter than the other, the empty spaces resulting from the shorter problem statement will be filled with the shorter problem statement repeated from the beginning.";

const WORD_SPLIT_SWAP: &str = "Every word (words are defined as sequences of symbols separated by spaces) in user query is split into 2 parts down the middle. If the word has odd number of symbols, the first part has one symbol less than the second part. After splitting, the 2 parts are swapped.";

const SYMBOL_REVERSAL: &str = "Every word (words are defined as sequences of symbols separated by spaces) in user query has its symbols in reverse order.";

const REMAP: &str = "There will be terms remapped in the user query. The remappings are defined inside 'defyn{}' block in the middle of user query.";

const RAIL_FENCE: &str = "The user query is encoded using the Rail Fence Cipher. The input is provided as a visual grid where the symbols (including spaces) of the encoded message string (message string does NOT contain any newline characters) are placed in a zigzag pattern across multiple rails (rows), and empty spaces are filled with dots (.). To decode, read the characters in zigzag order: Down-and-Right diagonally until you hit bottom rail, then Up-and-Right diagonally until you hit top rail, then Down-and-Right again etc... Rows are given on separate lines and all have equal lengths.";

const RECTANGLE_PERIMETER: &str = "The user query is mapped onto the perimeter of a rectangle. The message is written as a single continuous string following the edges of the shape in a clockwise manner, beginning at the top-left. The TRANSFORMED INPUT is provided as a visual text block representing this rectangle with GRID START and GRID END markers. The center of the shape is filled with dots.";

const SNAKE_VERTICAL: &str = "The user query is written into a grid using a vertical 'snake' (zigzag) pattern. Starting from the top-left, the text is written down the first column, then up the second column, then down the third, and so on. The TRANSFORMED INPUT is provided as a visual grid with GRID START and GRID END markers.";

const SNAKE_HORIZONTAL: &str = "The user query is written into a grid using a horizontal 'snake' (zigzag) pattern. Starting from the top-left, the text is written across the first row, then left across the second row, then right across the third, and so on. The TRANSFORMED INPUT is provided as a visual grid with GRID START and GRID END markers.";

const NOT_NOT: &str = "The user query has the words 'not not' inserted immediately before some terms (numerical values and adjectives). A double negation is logically equivalent to the original term, so delete every inserted 'not not' pair to recover the original query.";

const SATURATION: &str = "The user query appears after a long series of unrelated solved math questions. Ignore every preceding question and solution and solve only the final problem.";

/// The decoding rule for a spec. Baseline has no rule and is an error.
pub fn rule_text(spec: &TransformSpec) -> Result<String, TransformError> {
    let text = match spec.id {
        TransformId::WordReversal => WORD_REVERSAL,
        TransformId::SentenceReversal => SENTENCE_REVERSAL,
        TransformId::InterleaveWord => INTERLEAVE_WORD,
        TransformId::InterleaveLine => match spec.params.tag_style() {
            TagStyle::Prefix => INTERLEAVE_LINE_PREFIX,
            TagStyle::Suffix => INTERLEAVE_LINE_SUFFIX,
        },
        TransformId::InterleaveSymbol => INTERLEAVE_SYMBOL,
        TransformId::WordSplitSwap => WORD_SPLIT_SWAP,
        TransformId::SymbolReversal => SYMBOL_REVERSAL,
        TransformId::Opposites | TransformId::Wrappers => REMAP,
        TransformId::RailFence => RAIL_FENCE,
        TransformId::RectanglePerimeter => RECTANGLE_PERIMETER,
        TransformId::SnakeVertical => SNAKE_VERTICAL,
        TransformId::SnakeHorizontal => SNAKE_HORIZONTAL,
        TransformId::NotNot => NOT_NOT,
        TransformId::Saturation => SATURATION,
        TransformId::Baseline => {
            return Err(TransformError::UnknownTransform("baseline".into()))
        }
    };
    Ok(text.to_string())
}
